#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qspace/fields.hpp"
#include "qspace/geometry.hpp"
#include "qspace/rng.hpp"

namespace qspace {

enum class PhiMethod { mc_stratified, grid_oracle };

struct SeminormEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    PhiMethod method = PhiMethod::mc_stratified;
    Ball achieving_ball;            // sup-type estimates record the maximizer
    double convergence_delta = 0.0; // oracle refinement delta (std_error stays 0)
};

// Integration domain for the double integral; balls are the common case but
// the blow-up experiments integrate over pulled-back patch neighbourhoods.
struct Region {
    int dim = 0;
    double volume = 0.0;
    double diameter = 0.0;
    std::function<void(Rng&, double*)> sample_uniform;
    std::function<bool(const double*)> contains;
};

Region region_from_ball(const Ball& b);

// Sparse-support hint for the x-importance mixture: a union of disjoint
// equal-radius balls carrying all of the field's variation. When `pullback`
// is set the support is f^{-1} of those balls; samples are drawn in the image
// and mapped back, with the analytic Jacobian supplying the exact density.
struct SupportHint {
    std::vector<Pt> centers;
    double radius = 0.0;
    std::shared_ptr<const MapModel> pullback;
};

// Phi_alpha(u, B) = |B|^{2 alpha/n - 1} Int_B Int_B |u(x)-u(y)|^2 / |x-y|^{n+2 alpha}.
// mc_stratified draws x uniformly and y from dyadic annuli about x with
// per-annulus budgets proportional to 2^{-k(1-alpha)}; unbiased, with a
// truncated core whose relative mass is below 1e-4 for Lipschitz fields.
// grid_oracle is a deterministic polar quadrature (n <= 2) with the radial
// variable graded toward the diagonal; it exists as the independent check.
SeminormEstimate phi_alpha(const ScalarField& u, const Ball& b, double alpha,
                           std::size_t n_samples, std::uint64_t seed,
                           PhiMethod method = PhiMethod::mc_stratified);

SeminormEstimate phi_alpha_region(const ScalarField& u, const Region& region, double alpha,
                                  std::size_t n_samples, std::uint64_t seed,
                                  const SupportHint* hint = nullptr);

// Psi_{alpha,q}(u, B(x0,r)): truncated oscillation sum over k <= k_max with
// exact inner infimum for q = 2 and golden-section search otherwise.
// k_max < 0 selects the default: deep enough to resolve the field's finest
// feature (ceil(log2(r/h_u)) + 2) and to push the geometric tail, of ratio
// 2^{2 alpha - 2}, below the percent level.
SeminormEstimate psi_alpha_q(const ScalarField& u, const Ball& b, double alpha, double q,
                             int k_max, std::size_t n_samples, std::uint64_t seed);

int default_k_max(const ScalarField& u, double r, double alpha);

// Best-constant local oscillation inf_c mean |v_i - c|^q. q = 2 uses the
// closed-form variance identity; otherwise golden-section search over the
// sample range (force_search routes q = 2 through the search as well).
double inner_oscillation(const double* vals, std::size_t count, double q,
                         bool force_search = false);

struct BallSampler {
    Ball domain;           // centers drawn here
    double r_lo = 0.0;
    double r_hi = 0.0;     // radii log-uniform in [r_lo, r_hi]
    std::vector<Pt> snaps; // feature points; half the centers snap near these
};

BallSampler default_sampler(const ScalarField& u, const Ball& domain);

// Lower bound for sup_B sqrt(Phi_alpha(u,B)) over the sampled family, with a
// refinement pass over the leading candidates to damp the noise of the sup.
SeminormEstimate qnorm_estimate(const ScalarField& u, double alpha, const BallSampler& sampler,
                                std::size_t ball_budget, std::uint64_t seed,
                                std::size_t samples_per_ball = 4096);

// sup_B of the mean absolute deviation from the ball average.
SeminormEstimate bmo_norm_estimate(const ScalarField& u, const BallSampler& sampler,
                                   std::size_t ball_budget, std::uint64_t seed,
                                   std::size_t samples_per_ball = 2048);

struct EquivalenceReport {
    double psi = 0.0;
    double phi_inner = 0.0;  // Phi on B(x0, r/16)
    double phi_outer = 0.0;  // Phi on B(x0, 16 r)
    double ratio_lower = 0.0;  // psi / phi_inner
    double ratio_upper = 0.0;  // psi / phi_outer
    bool degenerate = false;   // constant field: 0/0
};

EquivalenceReport norm_equivalence_check(const ScalarField& u, const Ball& b, double alpha,
                                         double q, std::uint64_t seed,
                                         std::size_t n_samples = 200000);

} // namespace qspace
