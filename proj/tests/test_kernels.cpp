#include "doctest.h"

#include <cmath>
#include <vector>

#include "qspace/kernels.hpp"
#include "qspace/rng.hpp"

using namespace qspace;

namespace {

struct Cloud {
    std::vector<double> xs, ys, zs;
    kernels::PointsView view(int dim) const {
        kernels::PointsView v;
        v.dim = dim;
        v.count = xs.size();
        v.coord[0] = xs.data();
        v.coord[1] = ys.data();
        v.coord[2] = zs.data();
        return v;
    }
};

Cloud random_cloud(std::size_t count, std::uint64_t seed) {
    Cloud c;
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        c.xs.push_back(rng.uniform(-10.0, 10.0));
        c.ys.push_back(rng.uniform(-10.0, 10.0));
        c.zs.push_back(rng.uniform(-10.0, 10.0));
    }
    return c;
}

} // namespace

TEST_CASE("scalar and avx2 kernels agree bit for bit") {
    if (!kernels::avx2_available()) return;
    for (int dim : {1, 2, 3}) {
        for (std::size_t count : {1u, 3u, 4u, 5u, 17u, 1000u}) {
            const Cloud cloud = random_cloud(count, 42 + count + dim);
            const auto view = cloud.view(dim);
            Rng rng(7 * dim + count);
            for (int rep = 0; rep < 50; ++rep) {
                double q[3] = {rng.uniform(-12, 12), rng.uniform(-12, 12), rng.uniform(-12, 12)};

                kernels::force_isa(kernels::Isa::scalar);
                const auto scalar = kernels::min_dist_sq(view, q);
                std::vector<std::uint32_t> in_scalar;
                kernels::collect_within(view, q, 9.0, in_scalar);
                const double tent_scalar = kernels::tent_sum_accumulate(view, q, 2.5);

                kernels::force_isa(kernels::Isa::avx2);
                const auto simd = kernels::min_dist_sq(view, q);
                std::vector<std::uint32_t> in_simd;
                kernels::collect_within(view, q, 9.0, in_simd);
                const double tent_simd = kernels::tent_sum_accumulate(view, q, 2.5);

                CHECK(scalar.dist_sq == simd.dist_sq);
                CHECK(scalar.index == simd.index);
                CHECK(in_scalar == in_simd);
                CHECK(tent_scalar == tent_simd);
            }
        }
    }
    kernels::force_isa(kernels::avx2_available() ? kernels::Isa::avx2 : kernels::Isa::scalar);
}

TEST_CASE("min_dist_sq matches a plain loop") {
    const Cloud cloud = random_cloud(257, 9);
    const auto view = cloud.view(3);
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        double q[3] = {rng.uniform(-12, 12), rng.uniform(-12, 12), rng.uniform(-12, 12)};
        double best = 1e300;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < view.count; ++i) {
            double s = 0;
            for (int d = 0; d < 3; ++d) {
                const double t = view.coord[d][i] - q[d];
                s += t * t;
            }
            if (s < best) {
                best = s;
                best_i = i;
            }
        }
        const auto res = kernels::min_dist_sq(view, q);
        CHECK(res.dist_sq == doctest::Approx(best).epsilon(1e-14));
        CHECK(res.index == best_i);
    }
}
