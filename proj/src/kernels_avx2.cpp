#include "qspace/kernels.hpp"

#include <cmath>
#include <limits>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define QSPACE_HAVE_AVX2_BUILD 1
#endif

// AVX2 variants of the point-cloud kernels. Arithmetic per lane matches the
// scalar reference exactly: subtract, multiply, add in the same coordinate
// order, no FMA, so scalar and AVX2 results are bit-identical.

namespace qspace::kernels::detail {

#ifdef QSPACE_HAVE_AVX2_BUILD

namespace {

inline __m256d dist_sq_lanes(const PointsView& pts, std::size_t i, const double* q) {
    __m256d acc = _mm256_setzero_pd();
    for (int k = 0; k < pts.dim; ++k) {
        const __m256d p = _mm256_loadu_pd(pts.coord[k] + i);
        const __m256d dk = _mm256_sub_pd(p, _mm256_set1_pd(q[k]));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(dk, dk));
    }
    return acc;
}

} // namespace

MinDistResult min_dist_sq_avx2(const PointsView& pts, const double* q) {
    const std::size_t n = pts.count;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vbest = _mm256_set1_pd(best);
        alignas(32) double lane_best[4];
        alignas(32) std::int64_t lane_idx_arr[4] = {0, 0, 0, 0};
        __m256i vidx = _mm256_set_epi64x(3, 2, 1, 0);
        const __m256i step = _mm256_set1_epi64x(4);
        __m256i vbest_idx = vidx;
        for (; i + 4 <= n; i += 4) {
            const __m256d d = dist_sq_lanes(pts, i, q);
            const __m256d lt = _mm256_cmp_pd(d, vbest, _CMP_LT_OQ);
            vbest = _mm256_blendv_pd(vbest, d, lt);
            vbest_idx = _mm256_blendv_epi8(vbest_idx, vidx, _mm256_castpd_si256(lt));
            vidx = _mm256_add_epi64(vidx, step);
        }
        _mm256_store_pd(lane_best, vbest);
        _mm256_store_si256(reinterpret_cast<__m256i*>(lane_idx_arr), vbest_idx);
        // Tie-break on the lowest index so the result matches the scalar scan,
        // which keeps the first strict minimum.
        for (int lane = 0; lane < 4; ++lane) {
            const auto idx = static_cast<std::size_t>(lane_idx_arr[lane]);
            if (lane_best[lane] < best || (lane_best[lane] == best && idx < best_i)) {
                best = lane_best[lane];
                best_i = idx;
            }
        }
    }
    for (; i < n; ++i) {
        double d = 0.0;
        for (int k = 0; k < pts.dim; ++k) {
            const double dk = pts.coord[k][i] - q[k];
            d += dk * dk;
        }
        if (d < best) { best = d; best_i = i; }
    }
    return {best, best_i};
}

void collect_within_avx2(const PointsView& pts, const double* q, double rad_sq,
                         std::vector<std::uint32_t>& out) {
    const std::size_t n = pts.count;
    const __m256d vr = _mm256_set1_pd(rad_sq);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = dist_sq_lanes(pts, i, q);
        const int mask = _mm256_movemask_pd(_mm256_cmp_pd(d, vr, _CMP_LE_OQ));
        if (mask) {
            for (int lane = 0; lane < 4; ++lane)
                if (mask & (1 << lane)) out.push_back(static_cast<std::uint32_t>(i + lane));
        }
    }
    for (; i < n; ++i) {
        double d = 0.0;
        for (int k = 0; k < pts.dim; ++k) {
            const double dk = pts.coord[k][i] - q[k];
            d += dk * dk;
        }
        if (d <= rad_sq) out.push_back(static_cast<std::uint32_t>(i));
    }
}

double tent_sum_avx2(const PointsView& pts, const double* q, double rad) {
    // Tent terms are nonzero for at most a handful of disjoint balls, so the
    // scalar add order does not matter; sum lanes in fixed order anyway.
    const std::size_t n = pts.count;
    const __m256d vrad = _mm256_set1_pd(rad);
    const __m256d vzero = _mm256_setzero_pd();
    double acc = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = dist_sq_lanes(pts, i, q);
        const __m256d t = _mm256_max_pd(vzero, _mm256_sub_pd(vrad, _mm256_sqrt_pd(d)));
        if (_mm256_movemask_pd(_mm256_cmp_pd(t, vzero, _CMP_GT_OQ))) {
            alignas(32) double lanes[4];
            _mm256_store_pd(lanes, t);
            for (int lane = 0; lane < 4; ++lane) acc += lanes[lane];
        }
    }
    for (; i < n; ++i) {
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

#else // !QSPACE_HAVE_AVX2_BUILD

MinDistResult min_dist_sq_scalar(const PointsView& pts, const double* q);
void collect_within_scalar(const PointsView& pts, const double* q, double rad_sq,
                           std::vector<std::uint32_t>& out);
double tent_sum_scalar(const PointsView& pts, const double* q, double rad);

MinDistResult min_dist_sq_avx2(const PointsView& pts, const double* q) {
    return min_dist_sq_scalar(pts, q);
}
void collect_within_avx2(const PointsView& pts, const double* q, double rad_sq,
                         std::vector<std::uint32_t>& out) {
    collect_within_scalar(pts, q, rad_sq, out);
}
double tent_sum_avx2(const PointsView& pts, const double* q, double rad) {
    return tent_sum_scalar(pts, q, rad);
}

#endif

} // namespace qspace::kernels::detail
