#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qspace/config.hpp"
#include "qspace/fields.hpp"
#include "qspace/fractal.hpp"
#include "qspace/maps.hpp"
#include "qspace/muckenhoupt.hpp"
#include "qspace/qnorm.hpp"

namespace qspace {

// --- dimension table --------------------------------------------------------

struct DimTableRow {
    std::string name;
    std::string set_kind;
    int n = 0;
    double dim_m = 0.0, dim_m_r2 = 0.0;
    double dim_l = 0.0, dim_lg = 0.0;
    double elapsed_s = 0.0;
    bool has_checks = false;
    bool pass = true;
    std::string failures;  // failed check names, comma separated
};

struct DimTableResult {
    std::vector<DimTableRow> rows;
    bool all_pass = true;
};

DimTableResult run_dimension_table(const Config& cfg, const std::string& out_dir);

// --- Proposition 3.1 equivalence suite ---------------------------------------

struct EquivalenceRow {
    std::string field;
    double ball_r = 0.0;
    double alpha = 0.0, q = 0.0;
    double psi = 0.0, phi_inner = 0.0, phi_outer = 0.0;
    double ratio_lower = 0.0, ratio_upper = 0.0;
    bool degenerate = false;
};

struct EquivalenceResult {
    std::vector<EquivalenceRow> rows;
    // per (alpha, q): spread = max/min of each bracket ratio over the suite
    struct Spread {
        double alpha = 0.0, q = 0.0;
        double lower_spread = 0.0, upper_spread = 0.0;
    };
    std::vector<Spread> spreads;
    bool all_finite = true;
    double max_spread = 0.0;
};

EquivalenceResult run_norm_equivalence(const Config& cfg, const std::string& out_dir);

// --- composition ratios (Corollary 1.3 phenomena) ----------------------------

struct ComposeRow {
    std::string field;
    double alpha = 0.0;
    std::size_t ball_budget = 0;
    double qnorm_composed = 0.0, qnorm_base = 0.0, ratio = 0.0;
};

struct ComposeResult {
    std::vector<ComposeRow> rows;
    struct Trend {
        double alpha = 0.0;
        double max_ratio_lo = 0.0, max_ratio_hi = 0.0;  // at the two budgets
        double rel_change = 0.0;
    };
    std::vector<Trend> trends;
    double worst_rel_change = 0.0;
};

ComposeResult run_composition_ratio(const Config& cfg, const std::string& out_dir);

// --- blow-up experiments ------------------------------------------------------

// Parameters of the Cantor-construction blow-up of the composition operator.
struct BlowupParams {
    int n = 2;
    double alpha0 = 0.5;
    double alpha = 0.75;
    double beta = 1.0;
    double a = 0.0;      // 0 = derive from alpha0: a = 1 - 2^{-2 alpha0/(n - 2 alpha0)}
    std::vector<int> m_list = {1, 2, 3, 4};
};

double derive_cantor_a(double alpha0, int n);
double derive_beta0(double alpha, double a, int n);
double derive_ell(int m, double alpha, double a, double beta, int n);

// Tent sum u_m of the Theorem-style construction: one tent per level-m cube,
// radius (1/64) 2^{-ell} a ((1-a)/2)^m, center offset (1/4) 2^{-ell} a
// ((1-a)/2)^m along the first axis.
ScalarField build_um(double a, double alpha, double alpha0, double beta, int m, int n);

struct RatioPoint {
    int m = 0;
    double ell = 0.0;
    double numerator = 0.0, numerator_se = 0.0;
    double denominator = 0.0, denominator_se = 0.0;
    double ratio = 0.0;       // R_m
    double log2_ratio = 0.0;
    bool flagged = false;     // relative sigma above 25%
};

struct RatioCurve {
    std::vector<RatioPoint> points;
    double fitted_slope = 0.0;     // d log2(R_m) / dm
    double predicted_slope = 0.0;
    bool strictly_increasing = false;
};

RatioCurve run_blowup(const Config& cfg, const std::string& out_dir);

struct LatticeBlowupResult {
    RatioCurve curve;
    double companion_dim_l = 0.0;
    double companion_dim_lg = 0.0;
    bool companion_checked = false;
};

LatticeBlowupResult run_lattice_blowup(const Config& cfg, const std::string& out_dir);

// --- A_1 suite ----------------------------------------------------------------

struct A1SuiteRow {
    std::string map;
    std::string degeneracy;  // "E_a", "origin", "empty"
    double constant_estimate = 0.0;
    double growth_slope = 0.0;
    bool divergence_flag = false;
    bool expect_divergence = false;
    bool pass = true;
};

struct A1SuiteResult {
    std::vector<A1SuiteRow> rows;
    bool all_pass = true;
    bool convergence_demand_violated = false;  // drives CLI exit code 3
};

A1SuiteResult run_a1_suite(const Config& cfg, const std::string& out_dir);

// --- shared helpers ------------------------------------------------------------

// The bounded Lipschitz field suite used by the equivalence and composition
// experiments; `offset_annulus` keeps supports away from the origin so that
// compositions with the inversion stay pole-free, and `compact_only` swaps
// the scale-free members for further tents (the equivalence brackets compare
// like with like that way).
std::vector<ScalarField> standard_field_suite(int n, bool offset_annulus, std::size_t count,
                                              bool compact_only = false);

PointSet make_set_from_config(const Config& cfg, const std::string& section);

} // namespace qspace
