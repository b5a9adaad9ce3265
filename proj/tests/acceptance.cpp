// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Experiment criteria run off the configs shipped under configs/.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qspace/harness.hpp"
#include "qspace/qnorm.hpp"
#include "qspace/rng.hpp"
#include "qspace/whitney.hpp"

using namespace qspace;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", index, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string cfg_path(const char* name) {
    return std::string(QSPACE_SOURCE_DIR) + "/configs/" + name;
}

char buf[512];

// --- criterion 1: dimension table -------------------------------------------

void criterion_dimension_table() {
    const double t0 = now_s();
    const auto cfg = Config::parse_file(cfg_path("dim_table.cfg"));
    const double max_row_s = cfg.get_double("acceptance.max_row_seconds", 60.0);
    const auto res = run_dimension_table(cfg, "acceptance_out");
    bool pass = res.all_pass;
    double worst_row = 0.0;
    std::string detail;
    for (const auto& row : res.rows) {
        worst_row = std::max(worst_row, row.elapsed_s);
        if (!row.pass) detail += row.name + "{" + row.failures + "} ";
    }
    if (worst_row > max_row_s) {
        pass = false;
        detail += "row runtime above the budget ";
    }
    std::snprintf(buf, sizeof buf, "%zu rows, slowest %.1fs, total %.1fs %s", res.rows.size(),
                  worst_row, now_s() - t0, detail.c_str());
    report(1, "dimension table", pass, buf);
}

// --- criterion 2: norm equivalence -------------------------------------------

void criterion_norm_equivalence() {
    const double t0 = now_s();
    const auto cfg = Config::parse_file(cfg_path("norm_equivalence.cfg"));
    const double max_spread = cfg.get_double("acceptance.max_spread", 1000.0);
    const double max_seconds = cfg.get_double("acceptance.max_seconds", 600.0);
    const auto res = run_norm_equivalence(cfg, "acceptance_out");
    const double elapsed = now_s() - t0;
    bool pass = res.all_finite && elapsed < max_seconds;
    for (const auto& s : res.spreads)
        if (!(s.lower_spread < max_spread && s.upper_spread < max_spread)) pass = false;
    std::snprintf(buf, sizeof buf, "max spread %.3g (< %g), %s, %.0fs", res.max_spread,
                  max_spread, res.all_finite ? "all ratios finite" : "NON-FINITE RATIOS",
                  elapsed);
    report(2, "oscillation/energy equivalence", pass, buf);
}

// --- criterion 3: radial boundedness -----------------------------------------

void criterion_radial_boundedness() {
    const auto cfg_r = Config::parse_file(cfg_path("compose_radial.cfg"));
    const auto cfg_i = Config::parse_file(cfg_path("compose_inversion.cfg"));
    const double max_change = cfg_r.get_double("acceptance.max_rel_change", 0.10);
    const double max_change_i = cfg_i.get_double("acceptance.max_rel_change", 0.10);
    const auto radial = run_composition_ratio(cfg_r, "acceptance_out");
    const auto inversion = run_composition_ratio(cfg_i, "acceptance_out");
    const bool pass =
        radial.worst_rel_change < max_change && inversion.worst_rel_change < max_change_i;
    std::snprintf(buf, sizeof buf,
                  "budget trend: radial %.3f, inversion %.3f (< %g each)",
                  radial.worst_rel_change, inversion.worst_rel_change, max_change);
    report(3, "radial composition stays bounded", pass, buf);
}

// --- criterion 4: cantor blow-up ----------------------------------------------

void criterion_blowup() {
    const double t0 = now_s();
    const auto cfg_main = Config::parse_file(cfg_path("blowup.cfg"));
    const auto cfg_ctrl = Config::parse_file(cfg_path("blowup_control.cfg"));
    const double min_slope = cfg_main.get_double("acceptance.min_fitted_slope", 0.12);
    const bool need_increasing = cfg_main.get_bool("acceptance.require_increasing", true);
    const double max_seconds = cfg_main.get_double("acceptance.max_seconds", 900.0);
    const double max_ctrl = cfg_ctrl.get_double("acceptance.max_abs_slope", 0.05);
    const auto main_run = run_blowup(cfg_main, "acceptance_out");
    const auto control = run_blowup(cfg_ctrl, "acceptance_out");
    const double elapsed = now_s() - t0;
    bool pass = main_run.fitted_slope >= min_slope &&
                (!need_increasing || main_run.strictly_increasing) &&
                std::abs(control.fitted_slope) <= max_ctrl && elapsed < max_seconds;
    for (const auto& p : main_run.points) pass = pass && !p.flagged;
    std::snprintf(buf, sizeof buf,
                  "slope %.4f (pred %.4f, need >= %g), %s; control slope %.4f (|.| <= %g); %.0fs",
                  main_run.fitted_slope, main_run.predicted_slope, min_slope,
                  main_run.strictly_increasing ? "increasing" : "NOT increasing",
                  control.fitted_slope, max_ctrl, elapsed);
    report(4, "cantor-patch blow-up", pass, buf);
}

// --- criterion 5: lattice blow-up ----------------------------------------------

void criterion_lattice_blowup() {
    const auto cfg = Config::parse_file(cfg_path("lattice_blowup.cfg"));
    const double fraction = cfg.get_double("acceptance.min_slope_fraction", 0.5);
    const bool need_increasing = cfg.get_bool("acceptance.require_increasing", true);
    const double dim_l_max = cfg.get_double("acceptance.companion_dim_l_max", 0.1);
    const double target_lg = cfg.get_double("acceptance.companion_dim_lg_target", 1.0);
    const double lg_tol = cfg.get_double("acceptance.companion_dim_lg_tol", 0.15);
    const auto res = run_lattice_blowup(cfg, "acceptance_out");
    bool pass = (!need_increasing || res.curve.strictly_increasing) &&
                res.curve.fitted_slope >= fraction * res.curve.predicted_slope &&
                res.companion_checked && res.companion_dim_l <= dim_l_max &&
                std::abs(res.companion_dim_lg - target_lg) <= lg_tol;
    std::snprintf(buf, sizeof buf,
                  "slope %.4f (pred %.4f, need >= %g of it), %s; dims L=%.3f (<=%g) LG=%.3f (%.2f+-%g)",
                  res.curve.fitted_slope, res.curve.predicted_slope, fraction,
                  res.curve.strictly_increasing ? "increasing" : "NOT increasing",
                  res.companion_dim_l, dim_l_max, res.companion_dim_lg, target_lg, lg_tol);
    report(5, "lattice blow-up", pass, buf);
}

// --- criterion 6: A_1 suite ------------------------------------------------------

void criterion_a1_suite() {
    const auto res1 =
        run_a1_suite(Config::parse_file(cfg_path("a1_suite.cfg")), "acceptance_out");
    const auto res2 =
        run_a1_suite(Config::parse_file(cfg_path("a1_suite.cfg")), "acceptance_out");
    bool deterministic = res1.rows.size() == res2.rows.size();
    for (std::size_t i = 0; deterministic && i < res1.rows.size(); ++i)
        deterministic = res1.rows[i].constant_estimate == res2.rows[i].constant_estimate &&
                        res1.rows[i].divergence_flag == res2.rows[i].divergence_flag;
    const bool pass = res1.all_pass && deterministic;
    std::string flags;
    for (const auto& row : res1.rows)
        flags += row.map + "/" + row.degeneracy + (row.divergence_flag ? ":div " : ":conv ");
    std::snprintf(buf, sizeof buf, "%s%s", flags.c_str(),
                  deterministic ? "(bit-identical rerun)" : "(NON-DETERMINISTIC)");
    report(6, "A_1 convergence/divergence", pass, buf);
}

// --- criterion 7: exact property suites ------------------------------------------

void criterion_properties() {
    bool pass = true;
    std::string detail;

    // Phi invariances
    {
        const ScalarField tent = tent_field(Ball(Pt{0.4, -0.1}, 0.5));
        const Ball b(Pt{0.3, 0.0}, 0.8);
        const double alpha = 0.6;
        const auto base = phi_alpha(tent, b, alpha, 50000, 77);
        const auto scaled = phi_alpha(tent.scaled(3.0), b, alpha, 50000, 77);
        if (std::abs(scaled.value - 9.0 * base.value) > 1e-12 * scaled.value) {
            pass = false;
            detail += "quadratic-scaling ";
        }
        const Pt off{0.9, -1.2};
        const auto moved =
            phi_alpha(tent.translated(off), Ball(b.center + off, b.radius), alpha, 50000, 1234);
        if (std::abs(moved.value - base.value) >
            3.0 * (moved.std_error + base.std_error) + 0.03 * base.value) {
            pass = false;
            detail += "translation ";
        }
        for (double lambda : {0.25, 4.0}) {
            const Ball bl(Pt{b.center.c[0] / lambda, b.center.c[1] / lambda}, b.radius / lambda);
            const auto dil = phi_alpha(tent.dilated(lambda), bl, alpha, 50000, 4321);
            if (std::abs(dil.value - base.value) >
                3.0 * (dil.std_error + base.std_error) + 0.03 * base.value) {
                pass = false;
                detail += "dilation ";
            }
        }
    }

    // map inverse round trips and jacobian agreement
    {
        Rng rng(5);
        std::vector<MapModel> zoo;
        zoo.push_back(identity_map(2));
        zoo.push_back(radial_power_map(2.0, Pt::zeros(2)));
        zoo.push_back(radial_power_map(0.5, Pt::zeros(2)));
        zoo.push_back(inversion_map(Pt::zeros(2)));
        zoo.push_back(cantor_patch_map(0.5, 1.5, 3, 2));
        zoo.push_back(lattice_patch_map(LatticeFamily::three_n, 0.0, 1.0, 12.0, 1.0, 2));
        for (const auto& f : zoo) {
            for (int i = 0; i < 1000; ++i) {
                Pt x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
                if (norm(x) < 1e-3) x.c[0] += 0.5;
                const Pt back = f.inverse(f.eval(x));
                if (dist(back, x) / std::max(1.0, norm(x)) > 1e-10) {
                    pass = false;
                    detail += "roundtrip ";
                    break;
                }
            }
            for (int i = 0; i < 100; ++i) {
                Pt x{rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5)};
                if (!f.patches.empty() && f.patch_sphere_gap(x) < 1e-4) continue;
                const double analytic = f.jacobian_analytic(x);
                if (analytic == 0.0) continue;
                if (std::abs(f.jacobian_fd(x) - analytic) / analytic > 1e-5) {
                    pass = false;
                    detail += "jacobian ";
                    break;
                }
            }
        }
    }

    // Whitney invariants on every emitted cube
    {
        const auto cc = gen_cantor_centers(0.5, 3, 2);
        const Cube box(Pt{0.0, 0.0}, 1.0);
        const WhitneyOptions opt;
        const auto dec = whitney_decompose(cc.centers, box, 9, opt);
        if (dec.cubes.empty()) {
            pass = false;
            detail += "whitney-empty ";
        }
        const double sqrt_n = std::sqrt(2.0);
        for (const auto& wc : dec.cubes) {
            double d = 1e300;
            for (std::size_t i = 0; i < cc.centers.size(); ++i)
                d = std::min(d, dist_point_to_cube(cc.centers.point(i), wc.cube));
            if (d < opt.c1 * sqrt_n * wc.cube.edge - 1e-12 ||
                d > opt.c2 * sqrt_n * wc.cube.edge + 1e-12) {
                pass = false;
                detail += "whitney-(ii) ";
                break;
            }
        }
        for (std::size_t i = 0; i < dec.cubes.size() && pass; ++i) {
            for (std::size_t j = i + 1; j < dec.cubes.size(); ++j) {
                const Cube& a = dec.cubes[i].cube;
                const Cube& c = dec.cubes[j].cube;
                bool overlap = true;
                for (int d2 = 0; d2 < 2; ++d2) {
                    const double lo = std::max(a.min_corner.c[d2], c.min_corner.c[d2]);
                    const double hi =
                        std::min(a.min_corner.c[d2] + a.edge, c.min_corner.c[d2] + c.edge);
                    if (hi - lo <= 1e-12) overlap = false;
                }
                if (overlap) {
                    pass = false;
                    detail += "whitney-(i) ";
                    break;
                }
                if (cubes_touch(a, c)) {
                    const double ratio = a.edge / c.edge;
                    if (ratio < 0.25 - 1e-12 || ratio > 4.0 + 1e-12) {
                        pass = false;
                        detail += "whitney-(iii) ";
                        break;
                    }
                }
            }
        }
    }

    // variance-minimizer identity
    {
        Rng rng(31);
        std::vector<double> vals(300);
        for (auto& v : vals) v = rng.uniform(-2, 7);
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= double(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= double(vals.size());
        if (std::abs(inner_oscillation(vals.data(), vals.size(), 2.0) - var) >
            1e-12 * std::max(1.0, var)) {
            pass = false;
            detail += "variance-identity ";
        }
    }

    report(7, "exact property suites", pass,
           pass ? "invariances, round trips, jacobians, whitney, variance identity"
                : detail);
}

// --- criterion 8: oracle equivalence ----------------------------------------------

void criterion_oracles() {
    bool pass = true;
    std::string detail;

    // 20 oracle-eligible Phi instances
    {
        std::vector<ScalarField> fields;
        Pt a = Pt::zeros(2);
        a.c[0] = 1.0;
        fields.push_back(linear_field(a));
        Pt a2 = Pt::zeros(2);
        a2.c[0] = 0.5;
        a2.c[1] = -1.0;
        fields.push_back(linear_field(a2, 0.3));
        fields.push_back(tent_field(Ball(Pt{0.1, 0.2}, 0.8)));
        fields.push_back(tent_field(Ball(Pt{-0.3, 0.0}, 0.4), 1.5));
        fields.push_back(radial_norm_field(Pt{0.6, -0.6}));
        const std::vector<Ball> balls = {Ball(Pt{0.0, 0.0}, 1.0), Ball(Pt{0.25, -0.15}, 0.6)};
        const std::vector<double> alphas = {0.4, 0.65};
        int checked = 0, agreed = 0;
        for (std::size_t fi = 0; fi < fields.size(); ++fi)
            for (const auto& b : balls)
                for (double alpha : alphas) {
                    const auto oracle =
                        phi_alpha(fields[fi], b, alpha, 0, 0, PhiMethod::grid_oracle);
                    const auto mc = phi_alpha(fields[fi], b, alpha, 150000, 31 + fi);
                    ++checked;
                    if (std::abs(mc.value - oracle.value) <=
                        3.0 * mc.std_error + 0.02 * oracle.value + 1e-12)
                        ++agreed;
                }
        if (agreed != checked) pass = false;
        std::snprintf(buf, sizeof buf, "phi mc vs oracle %d/%d within 3 sigma; ", agreed,
                      checked);
        detail += buf;
    }

    // grid vs exact covering numbers within 2^n on exact-eligible instances
    {
        Rng rng(17);
        int checked = 0, within = 0;
        for (int n : {1, 2}) {
            for (int rep = 0; rep < 10; ++rep) {
                PointSet e(n);
                const int count = 4 + int(rng.uniform_index(30));
                for (int i = 0; i < count; ++i) {
                    Pt p = Pt::zeros(n);
                    for (int d = 0; d < n; ++d) p.c[d] = rng.uniform(0, 5);
                    e.push(p);
                }
                e.dedupe();
                for (double r : {0.5, 1.0, 2.0}) {
                    const double grid = double(covering_number(r, e, CoverMode::grid));
                    const double exact =
                        double(covering_number(r, e, CoverMode::exact_small));
                    ++checked;
                    if (grid >= exact - 1e-9 && grid <= std::pow(2.0, n) * exact + 1e-9)
                        ++within;
                }
            }
        }
        if (within != checked) pass = false;
        std::snprintf(buf, sizeof buf, "grid/exact covering %d/%d within [1, 2^n]", within,
                      checked);
        detail += buf;
    }
    report(8, "oracle equivalence", pass, detail);
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_dimension_table();
    criterion_norm_equivalence();
    criterion_radial_boundedness();
    criterion_blowup();
    criterion_lattice_blowup();
    criterion_a1_suite();
    criterion_properties();
    criterion_oracles();
    if (g_failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d criterion(s) FAILED\n", g_failures);
    return g_failures;
}
