#include "qspace/maps.hpp"

#include <cmath>
#include <stdexcept>

#include "qspace/parallel.hpp"
#include "qspace/rng.hpp"

namespace qspace {

namespace {

constexpr double kPoleEps = 1e-300;

// Locates the patch ball containing x, if any; patches are pairwise disjoint.
struct PatchHit {
    bool inside = false;
    Pt center;
    double radius = 0.0;
    double dist = 0.0;
};

PatchHit find_patch(const MapModel& f, const Pt& x) {
    PatchHit hit;
    for (const auto& group : f.patches) {
        if (group.centers.empty()) continue;
        const auto res = kernels::min_dist_sq(group.centers.view(), x.data());
        const double d = std::sqrt(res.dist_sq);
        if (d < group.radius) {
            hit.inside = true;
            hit.center = group.centers.point(res.index);
            hit.radius = group.radius;
            hit.dist = d;
            return hit;
        }
    }
    return hit;
}

Pt radial_about(const Pt& z, const Pt& x, double factor) {
    Pt y = x;
    for (int d = 0; d < x.dim; ++d) y.c[d] = z.c[d] + factor * (x.c[d] - z.c[d]);
    return y;
}

} // namespace

std::string MapModel::describe() const {
    switch (kind) {
    case MapKind::identity: return "identity";
    case MapKind::radial_power: return "radial_power(beta=" + std::to_string(beta) + ")";
    case MapKind::inversion: return "inversion";
    case MapKind::affine_scale: return "affine_scale(" + std::to_string(beta) + ")";
    case MapKind::cantor_patch: return "cantor_patch(beta=" + std::to_string(beta) + ")";
    case MapKind::lattice_patch: return "lattice_patch(beta=" + std::to_string(beta) + ")";
    }
    return "?";
}

bool MapModel::is_pole(const Pt& x) const {
    if (kind == MapKind::inversion) return dist(x, center) < kPoleEps;
    if (kind == MapKind::radial_power && beta < 0.0) return dist(x, center) < kPoleEps;
    return false;
}

Pt MapModel::eval(const Pt& x) const {
    switch (kind) {
    case MapKind::identity:
        return x;
    case MapKind::affine_scale:
        return beta * x;
    case MapKind::radial_power: {
        const double r = dist(x, center);
        if (r < kPoleEps) {
            if (beta < 0.0) throw std::domain_error("pole");
            return center;
        }
        return radial_about(center, x, std::pow(r, beta - 1.0));
    }
    case MapKind::inversion: {
        const double r2 = dist_sq(x, center);
        if (r2 < kPoleEps) throw std::domain_error("pole");
        return radial_about(center, x, 1.0 / r2);
    }
    case MapKind::cantor_patch:
    case MapKind::lattice_patch: {
        const PatchHit hit = find_patch(*this, x);
        if (!hit.inside || hit.dist < kPoleEps) return x;
        // R^{-beta} r^beta scaling of the offset vector
        const double factor = std::pow(hit.dist / hit.radius, beta);
        return radial_about(hit.center, x, factor);
    }
    }
    return x;
}

Pt MapModel::inverse(const Pt& y) const {
    switch (kind) {
    case MapKind::identity:
        return y;
    case MapKind::affine_scale:
        return (1.0 / beta) * y;
    case MapKind::radial_power: {
        const double s = dist(y, center);
        if (s < kPoleEps) {
            if (beta < 0.0) throw std::domain_error("pole");
            return center;
        }
        // inverse radial profile: s -> s^{1/beta}
        return radial_about(center, y, std::pow(s, 1.0 / beta - 1.0));
    }
    case MapKind::inversion: {
        const double s2 = dist_sq(y, center);
        if (s2 < kPoleEps) throw std::domain_error("pole");
        return radial_about(center, y, 1.0 / s2);
    }
    case MapKind::cantor_patch:
    case MapKind::lattice_patch: {
        // Patches map onto themselves, so the same patch contains y.
        const PatchHit hit = find_patch(*this, y);
        if (!hit.inside || hit.dist < kPoleEps) return y;
        // profile r -> R (r/R)^{beta+1}; inverse s -> R (s/R)^{1/(beta+1)}
        const double rel = hit.dist / hit.radius;
        const double factor = std::pow(rel, 1.0 / (beta + 1.0) - 1.0);
        return radial_about(hit.center, y, factor);
    }
    }
    return y;
}

double MapModel::jacobian_analytic(const Pt& x) const {
    const int n = x.dim;
    switch (kind) {
    case MapKind::identity:
        return 1.0;
    case MapKind::affine_scale:
        return std::pow(std::abs(beta), n);
    case MapKind::radial_power: {
        const double r = dist(x, center);
        if (r < kPoleEps) {
            if (beta > 1.0) return 0.0;
            if (beta == 1.0) return 1.0;
            throw std::domain_error("pole");
        }
        // profile g(r) = r^beta: |det| = |g'| (g/r)^{n-1} = |beta| r^{n(beta-1)}
        return std::abs(beta) * std::pow(r, n * (beta - 1.0));
    }
    case MapKind::inversion: {
        const double r = dist(x, center);
        if (r < kPoleEps) throw std::domain_error("pole");
        return std::pow(r, -2.0 * n);
    }
    case MapKind::cantor_patch:
    case MapKind::lattice_patch: {
        const PatchHit hit = find_patch(*this, x);
        if (!hit.inside) return 1.0;
        if (hit.dist < kPoleEps) return 0.0;
        // profile g(r) = R (r/R)^{beta+1}: det = (beta+1) (r/R)^{n beta}
        return (beta + 1.0) * std::pow(hit.dist / hit.radius, n * beta);
    }
    }
    return 1.0;
}

double MapModel::patch_sphere_gap(const Pt& x) const {
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& group : patches) {
        if (group.centers.empty()) continue;
        const auto res = kernels::min_dist_sq(group.centers.view(), x.data());
        gap = std::min(gap, std::abs(std::sqrt(res.dist_sq) - group.radius));
    }
    return gap;
}

double MapModel::jacobian_fd(const Pt& x0, double* op_norm) const {
    const int n = x0.dim;
    Pt x = x0;
    double h = std::max(1e-6, 1e-6 * norm(x));
    if (!patches.empty()) {
        // keep the stencil off patch spheres
        const double gap = patch_sphere_gap(x);
        if (gap < 2.0 * h) {
            const PatchHit hit = find_patch(*this, x);
            if (hit.inside) {
                const double pull = (hit.radius - 2.0 * h) / (hit.dist > 0 ? hit.dist : 1.0);
                x = radial_about(hit.center, x, std::min(1.0, pull));
            }
        }
    }
    double m[kMaxDim][kMaxDim];
    Pt xp, xm;
    for (int j = 0; j < n; ++j) {
        xp = x; xm = x;
        xp.c[j] += h;
        xm.c[j] -= h;
        const Pt fp = eval(xp), fm = eval(xm);
        for (int i = 0; i < n; ++i) m[i][j] = (fp.c[i] - fm.c[i]) / (2.0 * h);
    }
    // determinant by Gaussian elimination (n <= kMaxDim)
    double det = 1.0;
    double a[kMaxDim][kMaxDim];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = m[i][j];
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
        if (std::abs(a[piv][col]) < 1e-300) { det = 0.0; break; }
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a[piv][j], a[col][j]);
            det = -det;
        }
        det *= a[col][col];
        for (int row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            for (int j = col; j < n; ++j) a[row][j] -= f * a[col][j];
        }
    }
    if (op_norm) {
        // power iteration on M^T M
        double v[kMaxDim];
        for (int i = 0; i < n; ++i) v[i] = 1.0 / std::sqrt(static_cast<double>(n));
        double lambda = 0.0;
        for (int it = 0; it < 60; ++it) {
            double mv[kMaxDim] = {0};
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) mv[i] += m[i][j] * v[j];
            double mtmv[kMaxDim] = {0};
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) mtmv[j] += m[i][j] * mv[i];
            double nrm = 0.0;
            for (int i = 0; i < n; ++i) nrm += mtmv[i] * mtmv[i];
            nrm = std::sqrt(nrm);
            if (nrm < 1e-300) { lambda = 0.0; break; }
            lambda = nrm;
            for (int i = 0; i < n; ++i) v[i] = mtmv[i] / nrm;
        }
        *op_norm = std::sqrt(lambda);
    }
    return std::abs(det);
}

MapModel identity_map(int n) {
    MapModel f;
    f.kind = MapKind::identity;
    f.dim = n;
    f.center = Pt::zeros(n);
    return f;
}

MapModel radial_power_map(double beta, const Pt& center) {
    if (beta == 0.0) throw std::invalid_argument("beta must be nonzero");
    MapModel f;
    f.kind = MapKind::radial_power;
    f.dim = center.dim;
    f.beta = beta;
    f.center = center;
    return f;
}

MapModel inversion_map(const Pt& center) {
    MapModel f;
    f.kind = MapKind::inversion;
    f.dim = center.dim;
    f.center = center;
    return f;
}

MapModel affine_scale_map(double lambda, int n) {
    if (!(lambda > 0.0)) throw std::invalid_argument("scale must be positive");
    MapModel f;
    f.kind = MapKind::affine_scale;
    f.dim = n;
    f.beta = lambda;
    f.center = Pt::zeros(n);
    return f;
}

MapModel cantor_patch_map(double a, double beta, int m_max, int n) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("a must lie in (0,1)");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");

    const CantorConstruction cc = gen_cantor_centers(a, m_max, n);
    MapModel f;
    f.kind = MapKind::cantor_patch;
    f.dim = n;
    f.beta = beta;
    f.center = Pt::zeros(n);
    double edge = 1.0;
    for (int m = 1; m <= m_max; ++m) {
        edge *= (1.0 - a) / 2.0;
        PatchGroup group;
        group.radius = 0.5 * a * edge;
        group.centers = PointSet(n);
        for (const Cube& q : cc.levels[m - 1]) group.centers.push(q.center());
        f.patches.push_back(std::move(group));
    }
    return f;
}

MapModel lattice_patch_map(LatticeFamily family, double theta, double beta, double extent,
                           double patch_radius, int n) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    MapModel f;
    f.kind = MapKind::lattice_patch;
    f.dim = n;
    f.beta = beta;
    f.center = Pt::zeros(n);

    PatchGroup group;
    group.centers = PointSet(n);
    if (family == LatticeFamily::three_n) {
        if (!(patch_radius > 0.0 && patch_radius <= 1.5))
            throw std::invalid_argument("patch_radius must lie in (0, 3/2] on (3N)^n");
        std::vector<double> axis;
        for (double v = 3.0; v <= extent; v += 3.0) axis.push_back(v);
        if (axis.empty()) throw std::invalid_argument("extent too small for (3N)^n");
        Pt p = Pt::zeros(n);
        std::vector<std::size_t> idx(n, 0);
        for (;;) {
            for (int d = 0; d < n; ++d) p.c[d] = axis[idx[d]];
            group.centers.push(p);
            int d = 0;
            while (d < n && ++idx[d] == axis.size()) idx[d++] = 0;
            if (d == n) break;
        }
    } else {
        if (!(patch_radius > 0.0 && patch_radius <= 0.5))
            throw std::invalid_argument("patch_radius must lie in (0, 1/2] on the theta lattice");
        const int k_max = std::max(1, static_cast<int>(std::floor(std::log2(extent))));
        PointSet lat = gen_lattice_theta(theta, k_max, n);
        for (std::size_t i = 0; i < lat.size(); ++i) {
            Pt p = lat.point(i);
            bool in = true;
            for (int d = 0; d < n; ++d) in = in && p.c[d] <= extent;
            if (in) group.centers.push(p);
        }
    }
    group.radius = patch_radius;
    f.patches.push_back(std::move(group));
    return f;
}

double local_distortion(const MapModel& f, const Pt& z, double r, int n_dirs) {
    if (n_dirs < 8) throw std::invalid_argument("n_dirs must be >= 8");
    const int n = z.dim;
    if (f.kind == MapKind::inversion && dist(z, f.center) <= r)
        throw std::domain_error("unbounded distortion");
    const Pt fz = f.eval(z);
    double best = 0.0;
    if (n == 1) {
        for (double s : {-1.0, 1.0}) {
            Pt w = z;
            w.c[0] += s * r;
            best = std::max(best, dist(f.eval(w), fz));
        }
        return best;
    }
    if (n == 2) {
        for (int i = 0; i < n_dirs; ++i) {
            const double phi = 2.0 * M_PI * i / n_dirs;
            Pt w = z;
            w.c[0] += r * std::cos(phi);
            w.c[1] += r * std::sin(phi);
            best = std::max(best, dist(f.eval(w), fz));
        }
        return best;
    }
    // quasi-uniform spherical points via a fixed low-discrepancy stream
    Rng rng(0xd15c0, static_cast<std::uint64_t>(n_dirs));
    Pt w = z;
    double dir[kMaxDim];
    for (int i = 0; i < n_dirs; ++i) {
        rng.unit_vector(n, dir);
        for (int d = 0; d < n; ++d) w.c[d] = z.c[d] + r * dir[d];
        best = std::max(best, dist(f.eval(w), fz));
    }
    return best;
}

DistortionReport qc_dilatation_estimate(const MapModel& f, const Ball& region,
                                        std::size_t n_samples, std::uint64_t seed) {
    if (f.kind == MapKind::radial_power && f.beta < 0.0 && region.contains(f.center))
        throw std::domain_error("region contains the pole of a beta<0 radial map");
    if (f.kind == MapKind::inversion && region.contains(f.center))
        throw std::domain_error("region contains the inversion pole");

    const int n = region.center.dim;
    struct Slot {
        double ratio = 0.0;
        bool skipped = false;
        Pt x;
    };
    std::vector<Slot> slots(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        Rng rng(seed, i);
        Pt x = Pt::zeros(n);
        rng.uniform_in_ball(n, region.center.data(), region.radius, x.data());
        double op = 0.0;
        const double det = f.jacobian_fd(x, &op);
        if (det < 1e-300) {
            slots[i].skipped = true;
            return;
        }
        slots[i].ratio = std::pow(op, n) / det;
        slots[i].x = x;
    });

    DistortionReport rep;
    rep.sample_count = n_samples;
    rep.worst_point = region.center;
    for (const auto& s : slots) {
        if (s.skipped) {
            ++rep.skipped;
            continue;
        }
        if (s.ratio > rep.k_estimate) {
            rep.k_estimate = s.ratio;
            rep.worst_point = s.x;
        }
    }
    return rep;
}

} // namespace qspace
