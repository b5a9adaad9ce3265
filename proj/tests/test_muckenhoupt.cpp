#include "doctest.h"

#include <cmath>
#include <memory>

#include "qspace/muckenhoupt.hpp"
#include "qspace/rng.hpp"

using namespace qspace;

TEST_CASE("constant weights have A1 constant 1") {
    const ScalarField w = constant_field(3.0, 2);
    A1Options opt;
    opt.ball_budget = 400;
    opt.quad_samples = 128;
    const auto rep = a1_constant_estimate(w, nullptr, Ball(Pt{0.0, 0.0}, 2.0), opt);
    CHECK(rep.constant_estimate == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(rep.divergence_flag);
}

TEST_CASE("scale invariance: lambda w has the same constant") {
    const auto f = std::make_shared<MapModel>(radial_power_map(2.0, Pt::zeros(2)));
    const ScalarField w = jacobian_field(f);
    PointSet origin(2);
    origin.push(Pt{0.0, 0.0});
    A1Options opt;
    opt.ball_budget = 600;
    opt.quad_samples = 128;
    opt.seed = 5;
    const auto rep1 = a1_constant_estimate(w, &origin, Ball(Pt{0.0, 0.0}, 2.0), opt);
    const auto rep2 = a1_constant_estimate(w.scaled(7.25), &origin, Ball(Pt{0.0, 0.0}, 2.0), opt);
    CHECK(rep1.constant_estimate ==
          doctest::Approx(rep2.constant_estimate).epsilon(1e-12));
}

TEST_CASE("radial norm weight against dense-grid oracle") {
    // w(x) = |x| on B(0,2), E = {0}
    const ScalarField w = radial_norm_field(Pt::zeros(2));
    PointSet origin(2);
    origin.push(Pt{0.0, 0.0});
    A1Options opt;
    opt.ball_budget = 3000;
    opt.quad_samples = 512;
    opt.seed = 11;
    const auto rep = a1_constant_estimate(w, &origin, Ball(Pt{0.0, 0.0}, 2.0), opt);
    CHECK_FALSE(rep.divergence_flag);

    // deterministic oracle: dense grid of admissible balls; avg and inf of |x|
    // over B(c, r) have closed polar forms up to fine quadrature
    double oracle = 0.0;
    for (int ic = 1; ic <= 40; ++ic) {
        const double c = 2.0 * ic / 40.0;
        for (int ir = 1; ir <= 60; ++ir) {
            const double r = 0.499 * c * ir / 60.0;  // admissible: 2r < c
            // avg |x| over B((c,0), r) by polar quadrature
            double avg = 0.0;
            const int gt = 24, gp = 24;
            for (int it = 0; it < gt; ++it) {
                const double t = r * (it + 0.5) / gt;
                for (int ip = 0; ip < gp; ++ip) {
                    const double ph = 2.0 * M_PI * ip / gp;
                    avg += std::hypot(c + t * std::cos(ph), t * std::sin(ph)) * t;
                }
            }
            avg *= (r / gt) * (2.0 * M_PI / gp) / (M_PI * r * r);
            oracle = std::max(oracle, avg / (c - r));
        }
    }
    CHECK(rep.constant_estimate <= oracle * 1.10);
    CHECK(rep.constant_estimate >= oracle * 0.75);

    // stability over budgets
    A1Options big = opt;
    big.ball_budget = 10000;
    const auto rep2 = a1_constant_estimate(w, &origin, Ball(Pt{0.0, 0.0}, 2.0), big);
    CHECK(std::abs(rep2.constant_estimate - rep.constant_estimate) / rep.constant_estimate < 0.15);
}

TEST_CASE("monotone in the degeneracy set") {
    const auto f = std::make_shared<MapModel>(cantor_patch_map(0.5, 1.5, 3, 2));
    const ScalarField w = jacobian_field(f);
    const PointSet small = gen_cantor_centers(0.5, 2, 2).centers;
    const PointSet large = gen_cantor_centers(0.5, 3, 2).centers;
    A1Options opt;
    opt.ball_budget = 1500;
    opt.quad_samples = 256;
    opt.seed = 3;
    Pt half{0.5, 0.5};
    const auto rep_small = a1_constant_estimate(w, &small, Ball(half, 1.0), opt);
    const auto rep_large = a1_constant_estimate(w, &large, Ball(half, 1.0), opt);
    // enlarging E shrinks the admissible family: the constant cannot grow
    CHECK(rep_large.constant_estimate <= rep_small.constant_estimate * 1.25);
}

TEST_CASE("cantor jacobian: bounded with the right degeneracy set, divergent without") {
    const auto f = std::make_shared<MapModel>(cantor_patch_map(0.5, 1.5, 4, 2));
    const ScalarField w = jacobian_field(f);
    const PointSet e_a = gen_cantor_centers(0.5, 4, 2).centers;
    Pt half{0.5, 0.5};
    A1Options opt;
    opt.ball_budget = 12000;
    opt.quad_samples = 512;
    opt.seed = 17;

    const auto with_e = a1_constant_estimate(w, &e_a, Ball(half, 1.0), opt);
    CHECK_FALSE(with_e.divergence_flag);
    CHECK(with_e.growth_slope < 0.05);

    const auto without = a1_constant_estimate(w, nullptr, Ball(half, 1.0), opt);
    CHECK(without.divergence_flag);
    CHECK(without.constant_estimate > 10.0 * with_e.constant_estimate);
}

TEST_CASE("no admissible balls raises the documented error") {
    const ScalarField w = constant_field(1.0, 2);
    PointSet dense(2);
    for (int i = -12; i <= 12; ++i)
        for (int j = -12; j <= 12; ++j) dense.push(Pt{i * 0.01, j * 0.01});
    A1Options opt;
    opt.ball_budget = 50;
    opt.quad_samples = 32;
    // every sampled radius is large against the grid gap, so 2 r_B always
    // exceeds d(x_B, E) and no ball is admissible
    opt.r_lo_fraction = 0.2;
    opt.r_hi_fraction = 0.25;
    CHECK_THROWS_WITH_AS(
        a1_constant_estimate(w, &dense, Ball(Pt{0.0, 0.0}, 0.05), opt),
        "region inside degeneracy neighborhood", std::domain_error);
}

TEST_CASE("a1 reports are deterministic under a fixed seed") {
    const auto f = std::make_shared<MapModel>(radial_power_map(2.0, Pt::zeros(2)));
    const ScalarField w = jacobian_field(f);
    PointSet origin(2);
    origin.push(Pt{0.0, 0.0});
    A1Options opt;
    opt.ball_budget = 500;
    opt.quad_samples = 128;
    opt.seed = 123;
    setenv("QSPACE_THREADS", "1", 1);
    const auto a = a1_constant_estimate(w, &origin, Ball(Pt{0.0, 0.0}, 2.0), opt);
    setenv("QSPACE_THREADS", "3", 1);
    const auto b = a1_constant_estimate(w, &origin, Ball(Pt{0.0, 0.0}, 2.0), opt);
    unsetenv("QSPACE_THREADS");
    CHECK(a.constant_estimate == b.constant_estimate);
    CHECK(a.history == b.history);
}
