#include "qspace/whitney.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace qspace {

namespace {

double dist_cube_to_set(const Cube& q, const PointSet& e) {
    // min over points of the clamped coordinate distance
    const auto view = e.view();
    double best = std::numeric_limits<double>::infinity();
    const int dim = q.dim();
    for (std::size_t i = 0; i < view.count; ++i) {
        double s = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double lo = q.min_corner.c[d];
            const double hi = lo + q.edge;
            const double x = view.coord[d][i];
            double t = 0.0;
            if (x < lo) t = lo - x;
            else if (x > hi) t = x - hi;
            s += t * t;
        }
        if (s < best) best = s;
    }
    return std::sqrt(best);
}

bool touches_boundary(const Cube& q, const Cube& bbox, double tol) {
    for (int d = 0; d < q.dim(); ++d) {
        if (q.min_corner.c[d] <= bbox.min_corner.c[d] + tol) return true;
        if (q.min_corner.c[d] + q.edge >= bbox.min_corner.c[d] + bbox.edge - tol) return true;
    }
    return false;
}

struct Builder {
    const PointSet& e;
    const Cube& bbox;
    int level_max;
    WhitneyOptions opt;
    double sqrt_n;
    WhitneyDecomposition out;

    // dist/(sqrt(n)*edge) doubles (at least) every subdivision, so accepting at
    // the first level with ratio >= c1 keeps the ratio below 2*c1 + 2 <= c2 for
    // every cube whose parent was rejected.
    void visit(const Cube& q, int level) {
        const double d = dist_cube_to_set(q, e);
        const double scaled = sqrt_n * q.edge;
        if (d >= opt.c1 * scaled) {
            WhitneyCube wc;
            wc.cube = q;
            wc.level = level;
            wc.touches_bbox_boundary = touches_boundary(q, bbox, 1e-12 * bbox.edge);
            out.cubes.push_back(wc);
            return;
        }
        if (level >= level_max) return;  // still touching E's neighborhood; dropped
        const int dim = q.dim();
        const double half = 0.5 * q.edge;
        const int children = 1 << dim;
        for (int mask = 0; mask < children; ++mask) {
            Cube child;
            child.edge = half;
            child.min_corner = q.min_corner;
            for (int d2 = 0; d2 < dim; ++d2)
                if (mask & (1 << d2)) child.min_corner.c[d2] += half;
            visit(child, level + 1);
        }
    }
};

} // namespace

std::vector<Cube> dyadic_cubes(int level, const Cube& bbox) {
    if (level < 0) throw std::invalid_argument("level must be >= 0");
    const int dim = bbox.dim();
    const std::int64_t per_axis = std::int64_t{1} << level;
    const double edge = bbox.edge / static_cast<double>(per_axis);
    const double total = std::pow(static_cast<double>(per_axis), dim);
    if (total > 2.0e7) throw std::invalid_argument("dyadic level too deep");
    std::vector<Cube> cells;
    cells.reserve(static_cast<std::size_t>(total));
    std::vector<std::int64_t> idx(dim, 0);
    for (;;) {
        Cube q;
        q.edge = edge;
        q.min_corner = bbox.min_corner;
        for (int d = 0; d < dim; ++d) q.min_corner.c[d] += static_cast<double>(idx[d]) * edge;
        cells.push_back(q);
        int d = 0;
        while (d < dim && ++idx[d] == per_axis) idx[d++] = 0;
        if (d == dim) break;
    }
    return cells;
}

WhitneyDecomposition whitney_decompose(const PointSet& e, const Cube& bbox, int level_max,
                                       const WhitneyOptions& opt) {
    if (e.empty()) throw std::invalid_argument("empty set");
    if (level_max < 0) throw std::invalid_argument("level_max must be >= 0");
    if (!(opt.c1 > 0.0) || !(opt.c2 >= 2.0 * opt.c1 + 2.0))
        throw std::invalid_argument("whitney constants need c2 >= 2*c1 + 2 and c1 > 0");

    Builder b{e, bbox, level_max, opt, std::sqrt(static_cast<double>(bbox.dim())), {}};
    b.out.level_max = level_max;
    b.visit(bbox, 0);
    b.out.empty_warning = b.out.cubes.empty();
    return b.out;
}

} // namespace qspace
