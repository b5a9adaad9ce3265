#pragma once

#include <cstdint>
#include <cmath>

namespace qspace {

// Counter-seeded splitmix64 stream. Every Monte-Carlo work item derives its
// own stream from (seed, stream_id), so results are bit-identical for a fixed
// seed no matter how work is scheduled across threads.
class Rng {
public:
    Rng() : state_(0x9E3779B97F4A7C15ull) {}
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x6A09E667F3BCC909ull)) {}
    Rng(std::uint64_t seed, std::uint64_t stream_id)
        : state_(mix(mix(seed ^ 0x6A09E667F3BCC909ull) + 0x9E3779B97F4A7C15ull * (stream_id + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Log-uniform on [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    // Marsaglia polar method; consumes a variable number of uniforms but the
    // stream is private to the work item, so determinism is unaffected.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Uniform direction on the unit sphere in R^dim.
    void unit_vector(int dim, double* out) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (int d = 0; d < dim; ++d) {
                out[d] = normal();
                norm2 += out[d] * out[d];
            }
        } while (norm2 == 0.0);
        const double inv = 1.0 / std::sqrt(norm2);
        for (int d = 0; d < dim; ++d) out[d] *= inv;
    }

    // Uniform point in the ball B(center, radius) without rejection:
    // direction x radius^(1/dim) scaling.
    void uniform_in_ball(int dim, const double* center, double radius, double* out) {
        unit_vector(dim, out);
        const double t = radius * std::pow(uniform(), 1.0 / dim);
        for (int d = 0; d < dim; ++d) out[d] = center[d] + t * out[d];
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDull;
        z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ull;
        return z ^ (z >> 33);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace qspace
