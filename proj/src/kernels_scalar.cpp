#include "qspace/kernels.hpp"

#include <cmath>
#include <limits>

// Reference kernels. The AVX2 variants must produce bit-identical results:
// per-point arithmetic is plain mul/add in coordinate order (no FMA), and the
// reductions (min, compare, sum of disjoint terms) are order-insensitive.

namespace qspace::kernels::detail {

MinDistResult min_dist_sq_scalar(const PointsView& pts, const double* q) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    const std::size_t n = pts.count;
    switch (pts.dim) {
    case 1: {
        const double* xs = pts.coord[0];
        const double qx = q[0];
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = xs[i] - qx;
            const double d = dx * dx;
            if (d < best) { best = d; best_i = i; }
        }
        break;
    }
    case 2: {
        const double* xs = pts.coord[0];
        const double* ys = pts.coord[1];
        const double qx = q[0], qy = q[1];
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = xs[i] - qx;
            const double dy = ys[i] - qy;
            const double d = dx * dx + dy * dy;
            if (d < best) { best = d; best_i = i; }
        }
        break;
    }
    default: {
        for (std::size_t i = 0; i < n; ++i) {
            double d = 0.0;
            for (int k = 0; k < pts.dim; ++k) {
                const double dk = pts.coord[k][i] - q[k];
                d += dk * dk;
            }
            if (d < best) { best = d; best_i = i; }
        }
        break;
    }
    }
    return {best, best_i};
}

void collect_within_scalar(const PointsView& pts, const double* q, double rad_sq,
                           std::vector<std::uint32_t>& out) {
    const std::size_t n = pts.count;
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (int k = 0; k < pts.dim; ++k) {
            const double dk = pts.coord[k][i] - q[k];
            d += dk * dk;
        }
        if (d <= rad_sq) out.push_back(static_cast<std::uint32_t>(i));
    }
}

double tent_sum_scalar(const PointsView& pts, const double* q, double rad) {
    double acc = 0.0;
    const std::size_t n = pts.count;
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (int k = 0; k < pts.dim; ++k) {
            const double dk = pts.coord[k][i] - q[k];
            d += dk * dk;
        }
        const double t = rad - std::sqrt(d);
        if (t > 0.0) acc += t;
    }
    return acc;
}

} // namespace qspace::kernels::detail
