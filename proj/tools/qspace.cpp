// qspace: experiment drivers for the dimension, seminorm, Muckenhoupt and
// composition-blow-up studies. Each subcommand reads an experiment config,
// writes CSV rows under --out, and prints a short summary.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "qspace/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParam = 2;
constexpr int kExitDivergence = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out_dir, "output directory for CSV files");
}

qspace::Config load(const CommonArgs& args) {
    qspace::Config cfg = qspace::Config::parse_file(args.config_path);
    if (args.seed >= 0) cfg.override_value("experiment.seed", std::to_string(args.seed));
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for Q-space composition experiments"};
    app.require_subcommand(1);

    CommonArgs dim_args, qnorm_args, a1_args, compose_args, blowup_args, lattice_args;
    auto* dim = app.add_subcommand("dim", "self-similar dimension table");
    add_common(dim, dim_args);
    auto* qnorm = app.add_subcommand("qnorm", "oscillation/energy norm equivalence suite");
    add_common(qnorm, qnorm_args);
    auto* a1 = app.add_subcommand("a1check", "Muckenhoupt A_1 weight suite");
    add_common(a1, a1_args);
    auto* compose = app.add_subcommand("compose-ratio", "composition operator norm ratios");
    add_common(compose, compose_args);
    auto* blowup = app.add_subcommand("blowup", "Cantor-patch blow-up curve");
    add_common(blowup, blowup_args);
    auto* lattice = app.add_subcommand("lattice-blowup", "lattice-patch blow-up curve");
    add_common(lattice, lattice_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (dim->parsed()) {
            const auto res = qspace::run_dimension_table(load(dim_args), dim_args.out_dir);
            for (const auto& row : res.rows)
                std::printf("%-14s n=%d dim_M=%.4f dim_L=%.4f dim_LG=%.4f %s (%.1fs)\n",
                            row.name.c_str(), row.n, row.dim_m, row.dim_l, row.dim_lg,
                            row.has_checks ? (row.pass ? "pass" : "FAIL") : "-", row.elapsed_s);
            std::printf("dimension table: %s\n", res.all_pass ? "all checks passed" : "CHECK FAILURES");
            return kExitOk;
        }
        if (qnorm->parsed()) {
            const auto res = qspace::run_norm_equivalence(load(qnorm_args), qnorm_args.out_dir);
            for (const auto& s : res.spreads)
                std::printf("alpha=%.2f q=%.0f lower-spread=%.3g upper-spread=%.3g\n", s.alpha,
                            s.q, s.lower_spread, s.upper_spread);
            std::printf("equivalence: ratios %s, max spread %.3g\n",
                        res.all_finite ? "all finite" : "NON-FINITE", res.max_spread);
            return kExitOk;
        }
        if (a1->parsed()) {
            const auto res = qspace::run_a1_suite(load(a1_args), a1_args.out_dir);
            for (const auto& row : res.rows)
                std::printf("%-14s E=%-7s constant=%.4g slope=%.4f %s\n", row.map.c_str(),
                            row.degeneracy.c_str(), row.constant_estimate, row.growth_slope,
                            row.divergence_flag ? "divergent" : "convergent");
            if (res.convergence_demand_violated) {
                std::printf("a1 suite: divergence where convergence was demanded\n");
                return kExitDivergence;
            }
            std::printf("a1 suite: %s\n", res.all_pass ? "all rows as expected" : "UNEXPECTED FLAGS");
            return kExitOk;
        }
        if (compose->parsed()) {
            const auto res = qspace::run_composition_ratio(load(compose_args), compose_args.out_dir);
            for (const auto& t : res.trends)
                std::printf("alpha=%.2f max-ratio %.4f -> %.4f (rel change %.3f)\n", t.alpha,
                            t.max_ratio_lo, t.max_ratio_hi, t.rel_change);
            std::printf("composition ratios: worst budget trend %.3f\n", res.worst_rel_change);
            return kExitOk;
        }
        auto print_curve = [](const qspace::RatioCurve& curve) {
            for (const auto& p : curve.points)
                std::printf("m=%d ell=%.3f R=%.5g log2R=%.4f%s\n", p.m, p.ell, p.ratio,
                            p.log2_ratio, p.flagged ? " [noisy]" : "");
            std::printf("fitted slope %.4f (predicted %.4f), %s\n", curve.fitted_slope,
                        curve.predicted_slope,
                        curve.strictly_increasing ? "strictly increasing" : "NOT increasing");
        };
        if (blowup->parsed()) {
            print_curve(qspace::run_blowup(load(blowup_args), blowup_args.out_dir));
            return kExitOk;
        }
        if (lattice->parsed()) {
            const auto res = qspace::run_lattice_blowup(load(lattice_args), lattice_args.out_dir);
            print_curve(res.curve);
            if (res.companion_checked)
                std::printf("companion dims: dim_L=%.4f dim_LG=%.4f\n", res.companion_dim_l,
                            res.companion_dim_lg);
            return kExitOk;
        }
    } catch (const qspace::ConfigError& e) {
        std::fprintf(stderr, "parameter error: %s\n", e.what());
        return kExitParam;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "parameter error: %s\n", e.what());
        return kExitParam;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
