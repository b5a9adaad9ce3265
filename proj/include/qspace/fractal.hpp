#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qspace/pointset.hpp"

namespace qspace {

enum class CoverMode { grid, exact_small };

// Number of edge-r cubes needed to cover E. grid mode counts the half-open
// aligned grid cells meeting E (a 2^n-factor proxy that leaves every log-ratio
// limit unchanged); exact_small searches for the true minimum and is gated to
// |E| <= 64, n <= 2.
std::size_t covering_number(double r, const PointSet& e, CoverMode mode = CoverMode::grid);

// grid-mode covering number of the subset of E given by indices.
std::size_t covering_number_subset(double r, const PointSet& e,
                                   const std::vector<std::uint32_t>& idx);

struct DimensionEstimate {
    double value = 0.0;
    std::vector<std::pair<double, double>> per_n_values;  // (N, sup of ladder slopes)
    double r_min = 0.0, r_max = 0.0;                      // scale range actually used
    double regression_r2 = 0.0;                           // fit quality of the achieving ladder
    int ball_budget = 0;
    int dropped_n = 0;          // N values with no informative ball
    bool no_informative_balls = false;  // every N dropped; value pinned to 0
};

struct DimensionOptions {
    // Empty selects the adaptive default: powers of 4 up to 2*extent/r_floor,
    // the deepest ladder the truncation supports.
    std::vector<double> n_list;
    int ball_budget = 128;
    std::uint64_t seed = 1;
    double local_cutoff = 1.0;  // upper bound on ball radii for the local dimension
    // A ladder only counts as informative if it spans >= min_scales dyadic
    // scales and its peak covering count reaches min_count; windows that stay
    // below that resolve only finitely many points and contribute dimension 0.
    int min_scales = 3;
    std::size_t min_count = 48;
};

// Least-squares slope of log N_cov(r) vs log(1/r) over n_scales geometric
// scales in [r_min, r_max]; throws if fewer than 3 scales are usable.
DimensionEstimate dim_minkowski(const PointSet& e, double r_min, double r_max, int n_scales);

// Truncated local self-similar Minkowski dimension: for each N, the sup over
// sampled balls (r_B <= local_cutoff) of the log-log covering slope across the
// dyadic ladder r in [max(r_floor, r_B/N), r_B]; the value is the min over N.
DimensionEstimate dim_local_selfsim(const PointSet& e, const DimensionOptions& opt = {});

// Global variant: ball radii range up to the set extent and the family is
// rooted at the generator's expansion anchor, which is the family the
// covering estimates behind the dimension formulas actually control.
DimensionEstimate dim_global_selfsim(const PointSet& e, const DimensionOptions& opt = {});

} // namespace qspace
