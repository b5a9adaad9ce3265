#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qspace/fields.hpp"
#include "qspace/geometry.hpp"
#include "qspace/pointset.hpp"

namespace qspace {

struct A1Options {
    std::size_t ball_budget = 2000;
    std::size_t quad_samples = 512;
    double r_lo_fraction = 1e-4;  // sampled radii relative to the region radius
    double r_hi_fraction = 0.25;
    std::uint64_t seed = 1;
    // ess-inf by sample minimum by default; the robust mode uses the 1st
    // percentile instead for noisy fields.
    bool robust_essinf = false;
    // divergence: slope of log(constant) vs log(budget) over the last two
    // decades above this threshold
    double divergence_slope = 0.05;
};

struct A1Report {
    double constant_estimate = 1.0;
    Ball worst_ball;
    std::size_t admissible_count = 0;
    bool divergence_flag = false;
    double growth_slope = 0.0;
    // running max of the constant vs number of balls processed
    std::vector<std::pair<std::size_t, double>> history;
};

// Monte-Carlo estimate of the A_1(R^n; E) constant of w over balls B inside
// `region` with 2 r_B < d(x_B, E); E empty means the plain A_1(R^n) class.
A1Report a1_constant_estimate(const ScalarField& w, const PointSet* e, const Ball& region,
                              const A1Options& opt = {});

} // namespace qspace
