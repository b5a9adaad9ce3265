#include "qspace/kernels.hpp"

#include <cstdlib>

namespace qspace::kernels {

namespace detail {
MinDistResult min_dist_sq_scalar(const PointsView&, const double*);
MinDistResult min_dist_sq_avx2(const PointsView&, const double*);
void collect_within_scalar(const PointsView&, const double*, double, std::vector<std::uint32_t>&);
void collect_within_avx2(const PointsView&, const double*, double, std::vector<std::uint32_t>&);
double tent_sum_scalar(const PointsView&, const double*, double);
double tent_sum_avx2(const PointsView&, const double*, double);
} // namespace detail

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

Isa pick_default() {
    if (const char* env = std::getenv("QSPACE_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && avx2_available()) return Isa::avx2;
    }
    return avx2_available() ? Isa::avx2 : Isa::scalar;
}

Isa g_isa = pick_default();

} // namespace

Isa active_isa() { return g_isa; }

void force_isa(Isa isa) {
    g_isa = (isa == Isa::avx2 && !avx2_available()) ? Isa::scalar : isa;
}

std::string isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

MinDistResult min_dist_sq(const PointsView& pts, const double* q) {
    return g_isa == Isa::avx2 ? detail::min_dist_sq_avx2(pts, q)
                              : detail::min_dist_sq_scalar(pts, q);
}

void collect_within(const PointsView& pts, const double* q, double rad_sq,
                    std::vector<std::uint32_t>& out) {
    if (g_isa == Isa::avx2)
        detail::collect_within_avx2(pts, q, rad_sq, out);
    else
        detail::collect_within_scalar(pts, q, rad_sq, out);
}

double tent_sum_accumulate(const PointsView& pts, const double* q, double rad) {
    return g_isa == Isa::avx2 ? detail::tent_sum_avx2(pts, q, rad)
                              : detail::tent_sum_scalar(pts, q, rad);
}

} // namespace qspace::kernels
