#include "doctest.h"

#include <cmath>
#include <cstdlib>

#include "qspace/fields.hpp"
#include "qspace/harness.hpp"
#include "qspace/qnorm.hpp"
#include "qspace/rng.hpp"

using namespace qspace;

namespace {

const double kPhiLinearPin = 4.726543602414709;  // (8/3) sqrt(pi): u = x1, B(0,1), alpha = 1/2

ScalarField unit_linear() {
    Pt a = Pt::zeros(2);
    a.c[0] = 1.0;
    return linear_field(a);
}

} // namespace

TEST_CASE("field evaluation closed forms") {
    const ScalarField tent = tent_field(Ball(Pt{0.5, 0.0}, 0.75));
    CHECK(tent.eval(Pt{0.5, 0.0}) == doctest::Approx(0.75));
    CHECK(tent.eval(Pt{1.0, 0.0}) == doctest::Approx(0.25));
    CHECK(tent.eval(Pt{2.0, 0.0}) == 0.0);

    PointSet centers(2);
    centers.push(Pt{-1.0, 0.0});
    centers.push(Pt{1.0, 0.0});
    const ScalarField sum = tent_sum_field(centers, 0.5);
    CHECK(sum.eval(Pt{-1.0, 0.2}) == doctest::Approx(0.3));
    CHECK(sum.eval(Pt{1.0, 0.0}) == doctest::Approx(0.5));
    CHECK(sum.eval(Pt{0.0, 0.0}) == 0.0);

    const auto f = radial_power_map(2.0, Pt::zeros(2));
    const ScalarField comp = composed_field(unit_linear(), f);
    const Pt x{2.0, 0.0};
    CHECK(comp.eval(x) == doctest::Approx(4.0));

    const ScalarField lg = log_radial_field(Pt::zeros(2));
    CHECK(lg.eval(Pt{std::exp(1.0), 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("field transforms match pointwise definitions") {
    Rng rng(5);
    const ScalarField tent = tent_field(Ball(Pt{0.3, -0.2}, 0.6), 1.4);
    const double lambda = 4.0;
    const ScalarField dil = tent.dilated(lambda);
    const ScalarField scl = tent.scaled(2.5);
    const Pt off{0.4, 1.1};
    const ScalarField tra = tent.translated(off);
    for (int i = 0; i < 200; ++i) {
        const Pt x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        Pt lx = x;
        lx.c[0] *= lambda;
        lx.c[1] *= lambda;
        CHECK(dil.eval(x) == doctest::Approx(tent.eval(lx)).epsilon(1e-12));
        CHECK(scl.eval(x) == doctest::Approx(2.5 * tent.eval(x)).epsilon(1e-12));
        CHECK(tra.eval(x) == doctest::Approx(tent.eval(x - off)).epsilon(1e-12));
    }
}

TEST_CASE("phi of a constant field is exactly zero") {
    const ScalarField c = constant_field(3.5, 2);
    const auto est = phi_alpha(c, Ball(Pt{0.0, 0.0}, 1.0), 0.5, 1000, 1);
    CHECK(est.value == 0.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("phi oracle hits the closed-form pin for the linear field") {
    const auto est = phi_alpha(unit_linear(), Ball(Pt{0.0, 0.0}, 1.0), 0.5, 0, 0,
                               PhiMethod::grid_oracle);
    CHECK(est.std_error == 0.0);
    CHECK(est.value == doctest::Approx(kPhiLinearPin).epsilon(2e-3));
}

TEST_CASE("phi monte carlo agrees with the pin within 3 sigma") {
    const auto est = phi_alpha(unit_linear(), Ball(Pt{0.0, 0.0}, 1.0), 0.5, 300000, 7);
    CHECK(std::abs(est.value - kPhiLinearPin) <= 3.0 * est.std_error + 0.02 * kPhiLinearPin);
}

TEST_CASE("phi mc and oracle agree on smooth and kinked fields") {
    std::vector<ScalarField> fields = {unit_linear(), tent_field(Ball(Pt{0.1, 0.2}, 0.8)),
                                       radial_norm_field(Pt{0.5, -0.5})};
    std::vector<Ball> balls = {Ball(Pt{0.0, 0.0}, 1.0), Ball(Pt{0.2, -0.1}, 0.5)};
    for (double alpha : {0.3, 0.7}) {
        for (std::size_t fi = 0; fi < fields.size(); ++fi) {
            for (const auto& b : balls) {
                const auto oracle = phi_alpha(fields[fi], b, alpha, 0, 0, PhiMethod::grid_oracle);
                const auto mc = phi_alpha(fields[fi], b, alpha, 200000, 11 + fi);
                const double tol = 3.0 * mc.std_error + 0.02 * oracle.value + 1e-12;
                CHECK(std::abs(mc.value - oracle.value) <= tol);
            }
        }
    }
}

TEST_CASE("phi invariances") {
    const Ball b(Pt{0.4, -0.3}, 0.8);
    const ScalarField tent = tent_field(Ball(Pt{0.5, -0.2}, 0.5));
    const double alpha = 0.6;

    const auto base = phi_alpha(tent, b, alpha, 60000, 3);
    // quadratic scaling is exact pathwise (same seed)
    const auto doubled = phi_alpha(tent.scaled(2.0), b, alpha, 60000, 3);
    CHECK(doubled.value == doctest::Approx(4.0 * base.value).epsilon(1e-12));

    // translation invariance within 3 sigma (independent samples)
    const Pt off{1.3, 0.7};
    const auto moved = phi_alpha(tent.translated(off), Ball(b.center + off, b.radius), alpha,
                                 60000, 12345);
    CHECK(std::abs(moved.value - base.value) <=
          3.0 * (moved.std_error + base.std_error) + 0.03 * base.value);

    // dilation invariance: Phi(u(l.), B(x0/l, r/l)) = Phi(u, B) within 3 sigma
    for (double lambda : {0.25, 4.0}) {
        const ScalarField dil = tent.dilated(lambda);
        const Ball bl(Pt{b.center.c[0] / lambda, b.center.c[1] / lambda}, b.radius / lambda);
        const auto scaled = phi_alpha(dil, bl, alpha, 60000, 999);
        CHECK(std::abs(scaled.value - base.value) <=
              3.0 * (scaled.std_error + base.std_error) + 0.03 * base.value);
    }
}

TEST_CASE("phi rejects bad parameters and poles") {
    CHECK_THROWS_AS(phi_alpha(unit_linear(), Ball(Pt{0.0, 0.0}, 1.0), 1.2, 100, 1),
                    std::invalid_argument);
    const auto inv = inversion_map(Pt::zeros(2));
    const ScalarField comp = composed_field(tent_field(Ball(Pt{2.0, 0.0}, 0.5)), inv);
    CHECK_THROWS_AS(phi_alpha(comp, Ball(Pt{0.0, 0.0}, 0.5), 0.5, 100, 1), std::domain_error);
}

TEST_CASE("variance-minimizer identity for q = 2") {
    Rng rng(31);
    std::vector<double> vals(257);
    for (auto& v : vals) v = rng.uniform(-3, 5);
    const double exact = inner_oscillation(vals.data(), vals.size(), 2.0);
    const double searched = inner_oscillation(vals.data(), vals.size(), 2.0, true);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= double(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= double(vals.size());
    CHECK(std::abs(exact - var) <= 1e-12 * std::max(1.0, var));
    CHECK(std::abs(searched - var) <= 1e-9 * std::max(1.0, var));
}

TEST_CASE("psi basics") {
    const ScalarField c = constant_field(2.0, 2);
    const auto zero = psi_alpha_q(c, Ball(Pt{0.0, 0.0}, 1.0), 0.5, 2.0, 6, 20000, 1);
    CHECK(zero.value == doctest::Approx(0.0).epsilon(1e-15));

    CHECK_THROWS_AS(psi_alpha_q(unit_linear(), Ball(Pt{0.0, 0.0}, 1.0), 0.5, 2.5, 6, 1000, 1),
                    std::invalid_argument);
}

TEST_CASE("psi truncation tail is small for Lipschitz fields") {
    const ScalarField tent = tent_field(Ball(Pt{0.0, 0.0}, 0.5));
    const Ball b(Pt{0.0, 0.0}, 1.0);
    const double alpha = 0.5;
    const int k0 = default_k_max(tent, b.radius, alpha);
    const auto base = psi_alpha_q(tent, b, alpha, 2.0, k0, 400000, 5);
    const auto deeper = psi_alpha_q(tent, b, alpha, 2.0, k0 + 2, 400000, 5);
    CHECK(std::abs(deeper.value - base.value) <=
          0.01 * base.value + 2.0 * (base.std_error + deeper.std_error));
}

TEST_CASE("norm equivalence brackets behave") {
    const Ball b(Pt{0.0, 0.0}, 1.0);
    const auto degenerate = norm_equivalence_check(constant_field(1.0, 2), b, 0.5, 2.0, 1, 20000);
    CHECK(degenerate.degenerate);

    for (double q : {1.0, 2.0}) {
        const auto rep = norm_equivalence_check(tent_field(Ball(Pt{0.1, 0.0}, 0.6)), b, 0.5, q, 3,
                                                120000);
        CHECK(std::isfinite(rep.ratio_lower));
        CHECK(std::isfinite(rep.ratio_upper));
        CHECK(rep.ratio_lower > 0.0);
        CHECK(rep.ratio_upper > 0.0);
        // bracket orientation: the inner Phi ball is far smaller than the outer
        CHECK(rep.phi_inner < rep.phi_outer);
    }
}

TEST_CASE("qnorm estimate of a single tent is stable and localises") {
    const double rho = 0.5;
    const ScalarField tent = tent_field(Ball(Pt{0.2, -0.1}, rho));
    const BallSampler sampler = default_sampler(tent, Ball(Pt{0.0, 0.0}, 4.0));
    const auto lo = qnorm_estimate(tent, 0.5, sampler, 1000, 21, 1500);
    const auto hi = qnorm_estimate(tent, 0.5, sampler, 2000, 22, 1500);
    CHECK(std::abs(hi.value - lo.value) / lo.value < 0.05);
    CHECK(lo.achieving_ball.radius >= rho / 4.0);
    CHECK(lo.achieving_ball.radius <= 4.0 * rho);

    const auto zero = qnorm_estimate(constant_field(1.0, 2), 0.5, sampler, 64, 1, 500);
    CHECK(zero.value == 0.0);
}

TEST_CASE("qnorm of compact Lipschitz fields obeys the L*rho bound") {
    // fit the constant once on the unit tent, then check other instances
    const double alpha = 0.5;
    const ScalarField ref = tent_field(Ball(Pt{0.0, 0.0}, 1.0));
    const auto ref_est =
        qnorm_estimate(ref, alpha, default_sampler(ref, Ball(Pt{0.0, 0.0}, 4.0)), 600, 3, 2000);
    const double c_fit = 1.5 * ref_est.value;  // C(n, alpha) * L * rho with L = rho = 1

    struct CaseDef {
        ScalarField u;
        double lip, rho;
    };
    std::vector<CaseDef> cases;
    cases.push_back({tent_field(Ball(Pt{1.0, 0.5}, 0.25)), 1.0, 0.25});
    cases.push_back({tent_field(Ball(Pt{-0.5, 0.0}, 2.0), 0.5), 0.5, 2.0});
    cases.push_back({tent_field(Ball(Pt{0.0, 0.0}, 0.125), 3.0), 3.0, 0.125});
    for (const auto& c : cases) {
        const auto est = qnorm_estimate(c.u, alpha,
                                        default_sampler(c.u, Ball(Pt{0.0, 0.0}, 4.0)), 600, 9, 2000);
        CHECK(est.value <= c_fit * c.lip * c.rho * 1.2);
    }
}

TEST_CASE("bmo estimates") {
    const BallSampler sampler =
        default_sampler(constant_field(0.0, 2), Ball(Pt{0.0, 0.0}, 4.0));
    const auto zero = bmo_norm_estimate(constant_field(5.0, 2), sampler, 200, 1, 400);
    CHECK(zero.value == doctest::Approx(0.0).epsilon(1e-14));

    // log|x| is the canonical BMO function: estimate stays bounded as the
    // budget grows
    const ScalarField lg = log_radial_field(Pt::zeros(2));
    BallSampler s2 = sampler;
    s2.r_lo = 1e-4;
    const auto small = bmo_norm_estimate(lg, s2, 1000, 2, 600);
    const auto large = bmo_norm_estimate(lg, s2, 10000, 2, 600);
    CHECK(large.value < 2.0);
    CHECK(large.value <= small.value * 1.6 + 0.2);

    // consistency: bmo <= C * qnorm across the standard suite with one C
    const auto suite = standard_field_suite(2, false, 6);
    const double alpha = 0.5;
    double c_max = 0.0;
    for (const auto& u : suite) {
        const auto dom = Ball(Pt{0.0, 0.0}, 4.0);
        const auto qn = qnorm_estimate(u, alpha, default_sampler(u, dom), 400, 31, 1500);
        const auto bm = bmo_norm_estimate(u, default_sampler(u, dom), 400, 32, 800);
        if (qn.value > 1e-12) c_max = std::max(c_max, bm.value / qn.value);
    }
    CHECK(c_max < 3.0);
}

TEST_CASE("phi estimates are identical across worker counts") {
    const ScalarField tent = tent_field(Ball(Pt{0.0, 0.0}, 0.7));
    const Ball b(Pt{0.1, 0.1}, 1.0);
    setenv("QSPACE_THREADS", "1", 1);
    const auto serial = phi_alpha(tent, b, 0.5, 40000, 99);
    setenv("QSPACE_THREADS", "4", 1);
    const auto parallel = phi_alpha(tent, b, 0.5, 40000, 99);
    unsetenv("QSPACE_THREADS");
    CHECK(serial.value == parallel.value);
    CHECK(serial.std_error == parallel.std_error);
}
