#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qspace::kernels {

inline constexpr int kMaxDim = 8;

// Structure-of-arrays view over a point cloud. coord[d] points at the d-th
// coordinate array; all arrays have `count` entries.
struct PointsView {
    const double* coord[kMaxDim] = {};
    std::size_t count = 0;
    int dim = 0;
};

struct MinDistResult {
    double dist_sq;
    std::size_t index;
};

// Squared distance from q to the nearest point of pts; pts.count must be > 0.
MinDistResult min_dist_sq(const PointsView& pts, const double* q);

// Appends the indices of all points with |p - q|^2 <= rad_sq to out.
void collect_within(const PointsView& pts, const double* q, double rad_sq,
                    std::vector<std::uint32_t>& out);

// Accumulates sum over points of max(0, rad - |p - q|) (used by tent sums on
// pairwise disjoint balls, where at most one term is nonzero but the sum form
// keeps the kernel branch-free).
double tent_sum_accumulate(const PointsView& pts, const double* q, double rad);

enum class Isa { scalar, avx2 };

Isa active_isa();
void force_isa(Isa isa);   // tests use this to compare variants
std::string isa_name(Isa isa);
bool avx2_available();

} // namespace qspace::kernels
