#include "qspace/pointset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qspace {

PointSet::PointSet(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("ambient dimension out of range");
}

void PointSet::push(const Pt& p) { push(p.data()); }

void PointSet::push(const double* x) {
    for (int d = 0; d < dim_; ++d) {
        if (!std::isfinite(x[d])) throw std::invalid_argument("point coordinates must be finite");
        coords_[d].push_back(x[d]);
    }
    ++count_;
}

void PointSet::dedupe() {
    std::vector<std::size_t> order(count_);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (int d = 0; d < dim_; ++d) {
            if (coords_[d][a] != coords_[d][b]) return coords_[d][a] < coords_[d][b];
        }
        return false;
    });
    std::vector<double> out[kMaxDim];
    for (int d = 0; d < dim_; ++d) out[d].reserve(count_);
    for (std::size_t idx = 0; idx < order.size(); ++idx) {
        const std::size_t i = order[idx];
        if (idx > 0) {
            const std::size_t j = order[idx - 1];
            bool same = true;
            for (int d = 0; d < dim_ && same; ++d) same = coords_[d][i] == coords_[d][j];
            if (same) continue;
        }
        for (int d = 0; d < dim_; ++d) out[d].push_back(coords_[d][i]);
    }
    for (int d = 0; d < dim_; ++d) coords_[d] = std::move(out[d]);
    count_ = dim_ > 0 ? coords_[0].size() : 0;
}

Pt PointSet::point(std::size_t i) const {
    Pt p = Pt::zeros(dim_);
    for (int d = 0; d < dim_; ++d) p.c[d] = coords_[d][i];
    return p;
}

kernels::PointsView PointSet::view() const {
    kernels::PointsView v;
    v.dim = dim_;
    v.count = count_;
    for (int d = 0; d < dim_; ++d) v.coord[d] = coords_[d].data();
    return v;
}

Cube PointSet::bounding_box() const {
    if (empty()) throw std::invalid_argument("empty set");
    Pt lo = Pt::zeros(dim_), hi = Pt::zeros(dim_);
    for (int d = 0; d < dim_; ++d) {
        const auto [mn, mx] = std::minmax_element(coords_[d].begin(), coords_[d].end());
        lo.c[d] = *mn;
        hi.c[d] = *mx;
    }
    double edge = 0.0;
    for (int d = 0; d < dim_; ++d) edge = std::max(edge, hi.c[d] - lo.c[d]);
    return Cube(lo, edge > 0.0 ? edge : 1e-300);
}

double PointSet::extent() const {
    const Cube box = bounding_box();
    return box.edge * std::sqrt(static_cast<double>(dim_));
}

void PointSet::save(std::ostream& os) const {
    os << "n=" << dim_ << " kind=" << meta_.kind << " params=";
    bool first = true;
    for (const auto& [k, v] : meta_.params) {
        if (!first) os << ';';
        first = false;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s=%.17g", k.c_str(), v);
        os << buf;
    }
    os << '\n';
    char buf[64];
    for (std::size_t i = 0; i < count_; ++i) {
        for (int d = 0; d < dim_; ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", coords_[d][i]);
            os << (d ? " " : "") << buf;
        }
        os << '\n';
    }
}

PointSet PointSet::load(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("point set: missing header");
    int dim = 0;
    std::string kind, params;
    {
        std::istringstream hs(header);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("n=", 0) == 0) dim = std::stoi(tok.substr(2));
            else if (tok.rfind("kind=", 0) == 0) kind = tok.substr(5);
            else if (tok.rfind("params=", 0) == 0) params = tok.substr(7);
        }
    }
    if (dim < 1 || dim > kMaxDim) throw std::runtime_error("point set: bad dimension in header");
    PointSet ps(dim);
    ps.meta_.kind = kind.empty() ? "explicit" : kind;
    std::istringstream pstream(params);
    std::string entry;
    while (std::getline(pstream, entry, ';')) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        ps.meta_.params.emplace_back(entry.substr(0, eq), std::stod(entry.substr(eq + 1)));
    }
    std::string line;
    Pt p = Pt::zeros(dim);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        for (int d = 0; d < dim; ++d) {
            if (!(ls >> p.c[d])) throw std::runtime_error("point set: malformed point line");
        }
        ps.push(p);
    }
    return ps;
}

double dist_to_set(const Pt& x, const PointSet& e) {
    if (e.empty()) throw std::invalid_argument("empty set");
    return std::sqrt(kernels::min_dist_sq(e.view(), x.data()).dist_sq);
}

std::vector<std::uint32_t> points_in_ball(const PointSet& e, const Ball& b) {
    std::vector<std::uint32_t> out;
    kernels::collect_within(e.view(), b.center.data(), b.radius * b.radius, out);
    return out;
}

// --- Generators -----------------------------------------------------------

namespace {

void cartesian_power(const std::vector<double>& axis, int n, PointSet& out) {
    const double count_est = std::pow(static_cast<double>(axis.size()), n);
    if (count_est > 6.0e7) throw std::invalid_argument("lattice truncation too large");
    Pt p = Pt::zeros(n);
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        for (int d = 0; d < n; ++d) p.c[d] = axis[idx[d]];
        out.push(p);
        int d = 0;
        while (d < n && ++idx[d] == axis.size()) idx[d++] = 0;
        if (d == n) break;
    }
}

} // namespace

PointSet gen_lattice_theta(double theta, int k_max, int n) {
    if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("theta must lie in [0,1]");
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    std::vector<double> axis;
    for (int k = 0; k <= k_max; ++k) {
        const std::int64_t base = std::int64_t{1} << k;
        const std::int64_t len = std::int64_t{1} << static_cast<int>(std::floor(theta * k));
        for (std::int64_t j = 0; j <= len; ++j) axis.push_back(static_cast<double>(base + j));
    }
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());

    PointSet ps(n);
    cartesian_power(axis, n, ps);
    ps.dedupe();
    ps.meta().kind = "lattice_theta";
    ps.meta().params = {{"theta", theta}, {"k_max", static_cast<double>(k_max)}};
    ps.meta().r_floor = 1.0;
    ps.meta().bounded = false;
    ps.meta().anchor = Pt::zeros(n);
    return ps;
}

CantorConstruction gen_cantor_centers(double a, int m_max, int n) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("a must lie in (0,1)");
    if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
    const double child = (1.0 - a) / 2.0;

    // 1-D interval tree: left endpoints per level.
    std::vector<std::vector<double>> lefts(m_max + 1);
    lefts[0] = {0.0};
    double len = 1.0;
    for (int m = 1; m <= m_max; ++m) {
        const double next_len = len * child;
        lefts[m].reserve(lefts[m - 1].size() * 2);
        for (double L : lefts[m - 1]) {
            lefts[m].push_back(L);
            lefts[m].push_back(L + len - next_len);
        }
        len = next_len;
    }

    CantorConstruction out;
    out.centers = PointSet(n);
    out.levels.resize(m_max);

    // z_0 = center of the unit cube.
    Pt z0 = Pt::zeros(n);
    for (int d = 0; d < n; ++d) z0.c[d] = 0.5;
    out.centers.push(z0);

    len = 1.0;
    for (int m = 1; m <= m_max; ++m) {
        len *= child;
        const auto& ax = lefts[m];
        const double cube_count = std::pow(static_cast<double>(ax.size()), n);
        if (cube_count > 6.0e7) throw std::invalid_argument("cantor truncation too large");
        out.levels[m - 1].reserve(static_cast<std::size_t>(cube_count));
        Pt corner = Pt::zeros(n);
        std::vector<std::size_t> idx(n, 0);
        for (;;) {
            for (int d = 0; d < n; ++d) corner.c[d] = ax[idx[d]];
            Cube q(corner, len);
            out.levels[m - 1].push_back(q);
            out.centers.push(q.center());
            int d = 0;
            while (d < n && ++idx[d] == ax.size()) idx[d++] = 0;
            if (d == n) break;
        }
    }
    out.centers.dedupe();
    out.centers.meta().kind = "cantor_centers";
    out.centers.meta().params = {{"a", a}, {"m_max", static_cast<double>(m_max)}};
    out.centers.meta().r_floor = std::pow(child, m_max);
    out.centers.meta().bounded = true;
    out.centers.meta().anchor = Pt::zeros(n);
    return out;
}

PointSet gen_cantor_extension(double a, int m_max, int k_max, int n) {
    if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
    const CantorConstruction base = gen_cantor_centers(a, m_max, n);
    const double scale = 2.0 / (1.0 - a);
    PointSet ps(n);
    Pt p = Pt::zeros(n);
    double factor = 1.0;
    for (int k = 0; k <= k_max; ++k) {
        for (std::size_t i = 0; i < base.centers.size(); ++i) {
            for (int d = 0; d < n; ++d) p.c[d] = factor * base.centers.coord(d, i);
            ps.push(p);
        }
        factor *= scale;
    }
    ps.dedupe();
    ps.meta().kind = "cantor_extension";
    ps.meta().params = {{"a", a},
                        {"m_max", static_cast<double>(m_max)},
                        {"k_max", static_cast<double>(k_max)}};
    ps.meta().r_floor = std::pow((1.0 - a) / 2.0, m_max);
    ps.meta().bounded = false;
    ps.meta().anchor = Pt::zeros(n);
    return ps;
}

double unit_ball_volume(int n) {
    // pi^(n/2) / Gamma(n/2 + 1)
    return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double Ball::volume() const {
    return unit_ball_volume(center.dim) * std::pow(radius, center.dim);
}

} // namespace qspace
