#include "doctest.h"

#include <cmath>

#include "qspace/maps.hpp"
#include "qspace/rng.hpp"

using namespace qspace;

namespace {

Pt random_point(Rng& rng, int n, double lo, double hi) {
    Pt p = Pt::zeros(n);
    for (int d = 0; d < n; ++d) p.c[d] = rng.uniform(lo, hi);
    return p;
}

std::vector<MapModel> zoo(int n) {
    std::vector<MapModel> maps;
    maps.push_back(identity_map(n));
    maps.push_back(radial_power_map(2.0, Pt::zeros(n)));
    maps.push_back(radial_power_map(0.5, Pt::zeros(n)));
    maps.push_back(inversion_map(Pt::zeros(n)));
    maps.push_back(affine_scale_map(0.25, n));
    maps.push_back(cantor_patch_map(0.5, 1.5, 3, n));
    if (n == 2) maps.push_back(lattice_patch_map(LatticeFamily::three_n, 0.0, 1.0, 12.0, 1.0, n));
    return maps;
}

} // namespace

TEST_CASE("radial power evaluation") {
    const auto f = radial_power_map(2.0, Pt::zeros(2));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Pt unit{inv_sqrt2, inv_sqrt2};
    const Pt fu = f.eval(unit);
    CHECK(fu.c[0] == doctest::Approx(unit.c[0]));
    CHECK(fu.c[1] == doctest::Approx(unit.c[1]));
    const Pt two{2.0, 0.0};
    const Pt f2 = f.eval(two);
    CHECK(f2.c[0] == doctest::Approx(4.0));
    CHECK(f2.c[1] == doctest::Approx(0.0));

    // beta = 1 is the identity everywhere
    const auto id_like = radial_power_map(1.0, Pt::zeros(2));
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const Pt x = random_point(rng, 2, -3, 3);
        const Pt y = id_like.eval(x);
        CHECK(dist(x, y) < 1e-14);
    }
}

TEST_CASE("radial power inverse on radii") {
    const auto f = radial_power_map(2.0, Pt::zeros(2));
    const Pt y{4.0, 0.0};
    const Pt x = f.inverse(y);
    CHECK(x.c[0] == doctest::Approx(2.0));
    CHECK(x.c[1] == doctest::Approx(0.0));
}

TEST_CASE("inverse round trips across the zoo") {
    Rng rng(11);
    for (int n : {1, 2, 3}) {
        for (const auto& f : zoo(n)) {
            for (int i = 0; i < 1000; ++i) {
                Pt x = random_point(rng, n, -2, 2);
                if (norm(x) < 1e-3) x.c[0] += 0.5;  // keep clear of poles
                const Pt y = f.eval(x);
                const Pt back = f.inverse(y);
                const double rel = dist(back, x) / std::max(1.0, norm(x));
                CHECK(rel <= 1e-10);
            }
        }
    }
}

TEST_CASE("patched maps are the identity on patch boundaries") {
    const auto f = cantor_patch_map(0.4, 2.0, 4, 2);
    Rng rng(3);
    // sample sphere points on 100 random patch boundaries
    for (int rep = 0; rep < 100; ++rep) {
        const auto& group = f.patches[rng.uniform_index(f.patches.size())];
        const Pt z = group.centers.point(rng.uniform_index(group.centers.size()));
        double dir[2];
        rng.unit_vector(2, dir);
        Pt x = z;
        x.c[0] += group.radius * dir[0];
        x.c[1] += group.radius * dir[1];
        const Pt fx = f.eval(x);
        CHECK(dist(fx, x) <= 1e-12);
    }
}

TEST_CASE("cantor patches are pairwise disjoint and inside their cubes") {
    const double a = 0.5;
    const int m_max = 3;
    const auto f = cantor_patch_map(a, 1.0, m_max, 2);
    const auto cc = gen_cantor_centers(a, m_max, 2);
    // patch (m,j) sits inside Q_{m,j}
    for (int m = 1; m <= m_max; ++m) {
        const auto& group = f.patches[m - 1];
        for (std::size_t j = 0; j < group.centers.size(); ++j) {
            const Pt z = group.centers.point(j);
            bool inside_some = false;
            for (const Cube& q : cc.levels[m - 1]) {
                if (dist_point_to_cube(z, q) == 0.0 &&
                    z.c[0] - group.radius >= q.min_corner.c[0] - 1e-12 &&
                    z.c[0] + group.radius <= q.min_corner.c[0] + q.edge + 1e-12)
                    inside_some = true;
            }
            CHECK(inside_some);
        }
    }
    // pairwise disjoint across all patches
    std::vector<std::pair<Pt, double>> balls;
    for (const auto& g : f.patches)
        for (std::size_t i = 0; i < g.centers.size(); ++i)
            balls.emplace_back(g.centers.point(i), g.radius);
    for (std::size_t i = 0; i < balls.size(); ++i)
        for (std::size_t j = i + 1; j < balls.size(); ++j)
            CHECK(dist(balls[i].first, balls[j].first) >=
                  balls[i].second + balls[j].second - 1e-12);
}

TEST_CASE("jacobians: analytic equals finite differences") {
    Rng rng(7);
    const int n = 2;
    for (const auto& f : zoo(n)) {
        for (double r : {0.5, 1.0, 2.0}) {
            for (int i = 0; i < 40; ++i) {
                double dir[2];
                rng.unit_vector(2, dir);
                Pt x = Pt::zeros(2);
                x.c[0] = r * dir[0];
                x.c[1] = r * dir[1];
                if (!f.patches.empty() && f.patch_sphere_gap(x) < 1e-4) continue;
                const double analytic = f.jacobian_analytic(x);
                const double fd = f.jacobian_fd(x);
                if (analytic == 0.0) continue;
                CHECK(std::abs(fd - analytic) / analytic < 1e-5);
            }
        }
    }
}

TEST_CASE("radial jacobian closed form") {
    const auto f = radial_power_map(2.0, Pt::zeros(2));
    for (double r : {0.5, 1.0, 2.0}) {
        const Pt x{r, 0.0};
        CHECK(f.jacobian_analytic(x) == doctest::Approx(2.0 * r * r).epsilon(1e-12));
    }
    const auto id = identity_map(3);
    CHECK(id.jacobian_analytic(Pt{0.3, 0.1, -2.0}) == 1.0);
    // outside every patch the cantor map is the identity
    const auto cp = cantor_patch_map(0.5, 1.5, 3, 2);
    CHECK(cp.jacobian_analytic(Pt{-0.5, -0.5}) == 1.0);
}

TEST_CASE("jacobian chain rule J_{f^{-1}}(f(x)) J_f(x) = 1") {
    Rng rng(19);
    const auto f = cantor_patch_map(0.5, 1.3, 3, 2);
    for (int i = 0; i < 200; ++i) {
        const Pt x = random_point(rng, 2, 0, 1);
        const double jf = f.jacobian_analytic(x);
        if (jf == 0.0) continue;
        const Pt y = f.eval(x);
        // J_{f^{-1}}(y) = 1 / J_f(x) for our radial profiles
        const double r = dist(y, f.patches[0].centers.point(0));
        (void)r;
        double jinv;
        {
            // evaluate via finite differences of the inverse
            const double h = 1e-6;
            double m[2][2];
            for (int c = 0; c < 2; ++c) {
                Pt yp = y, ym = y;
                yp.c[c] += h;
                ym.c[c] -= h;
                const Pt a = f.inverse(yp), b = f.inverse(ym);
                m[0][c] = (a.c[0] - b.c[0]) / (2 * h);
                m[1][c] = (a.c[1] - b.c[1]) / (2 * h);
            }
            jinv = std::abs(m[0][0] * m[1][1] - m[0][1] * m[1][0]);
        }
        CHECK(jinv * jf == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("local distortion of model maps") {
    const auto id = identity_map(2);
    CHECK(local_distortion(id, Pt{0.3, 0.4}, 0.25, 64) == doctest::Approx(0.25));

    const auto f = radial_power_map(2.0, Pt::zeros(2));
    for (double r : {0.25, 0.5, 1.0}) {
        CHECK(local_distortion(f, Pt::zeros(2), r, 64) == doctest::Approx(r * r));
    }

    CHECK_THROWS_AS(local_distortion(inversion_map(Pt::zeros(2)), Pt{0.1, 0.0}, 0.5, 16),
                    std::domain_error);
}

TEST_CASE("dyadic band counting of L_f stays bounded") {
    // quasisymmetry: the number of k with L_f(z, 2^-k r) in a fixed dyadic
    // band is uniformly bounded
    const auto f = radial_power_map(3.0, Pt::zeros(2));
    const Pt z{0.7, 0.1};
    const double r = 1.0;
    std::vector<double> values;
    for (int k = 0; k <= 30; ++k) values.push_back(local_distortion(f, z, std::ldexp(r, -k), 32));
    const double top = values[0];
    for (int j = 0; j < 20; ++j) {
        int in_band = 0;
        for (double v : values)
            if (v >= std::ldexp(top, -j - 1) && v < std::ldexp(top, -j)) ++in_band;
        CHECK(in_band <= 3);
    }
}

TEST_CASE("dilatation estimates") {
    const auto id = identity_map(2);
    const auto rep_id = qc_dilatation_estimate(id, Ball(Pt{0.0, 0.0}, 1.0), 500, 3);
    CHECK(rep_id.k_estimate == doctest::Approx(1.0).epsilon(1e-6));

    const auto f = radial_power_map(2.0, Pt::zeros(2));
    const auto rep = qc_dilatation_estimate(f, Ball(Pt{0.5, 0.0}, 1.2), 4000, 5);
    CHECK(rep.k_estimate == doctest::Approx(2.0).epsilon(0.05));

    // whole patched map has the same dilatation as a single patch
    const auto one = cantor_patch_map(0.5, 1.5, 1, 2);
    const auto all = cantor_patch_map(0.5, 1.5, 4, 2);
    Pt half{0.5, 0.5};
    const auto rep_one = qc_dilatation_estimate(one, Ball(half, 0.75), 6000, 7);
    const auto rep_all = qc_dilatation_estimate(all, Ball(half, 0.75), 6000, 7);
    CHECK(rep_all.k_estimate == doctest::Approx(rep_one.k_estimate).epsilon(0.08));

    // beta < 0 radial maps are rejected when the region holds the pole
    const auto neg = radial_power_map(-1.0, Pt::zeros(2));
    CHECK_THROWS_AS(qc_dilatation_estimate(neg, Ball(Pt{0.0, 0.0}, 1.0), 100, 1),
                    std::domain_error);
}

TEST_CASE("dilatation stays stable as samples grow") {
    const auto f = cantor_patch_map(0.4, 2.0, 3, 2);
    Pt half{0.5, 0.5};
    const auto lo = qc_dilatation_estimate(f, Ball(half, 0.75), 1000, 11);
    const auto hi = qc_dilatation_estimate(f, Ball(half, 0.75), 10000, 11);
    CHECK(std::isfinite(lo.k_estimate));
    CHECK(std::isfinite(hi.k_estimate));
    CHECK(hi.k_estimate <= lo.k_estimate * 1.25 + 0.5);
    CHECK(hi.k_estimate >= lo.k_estimate * 0.9 - 0.1);
}
