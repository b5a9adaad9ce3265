#include "qspace/muckenhoupt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qspace/parallel.hpp"
#include "qspace/rng.hpp"

namespace qspace {

namespace {

bool admissible(const Ball& b, const PointSet* e) {
    if (!e || e->empty()) return true;
    return 2.0 * b.radius < dist_to_set(b.center, *e);
}

// Half the balls have centers placed a controlled multiple of their radius
// from E, where the A_1 inequality binds; the rest roam the region. With no
// degeneracy set the snapped half hugs the weight's own feature points.
Ball propose_ball(Rng& rng, std::size_t index, const Ball& region, const PointSet* e,
                  const std::vector<Pt>& features, const A1Options& opt) {
    const int n = region.center.dim;
    const double r_hi = region.radius * opt.r_hi_fraction;
    const double r_lo = region.radius * opt.r_lo_fraction;
    const double r = rng.log_uniform(r_lo, r_hi);
    Pt c = Pt::zeros(n);
    const bool snap = index % 2 == 0;
    if (snap && e && !e->empty()) {
        // the inequality binds as 2r_B approaches d(x_B, E), so the snapped
        // half concentrates just outside the admissibility threshold
        const Pt p = e->point(rng.uniform_index(e->size()));
        double dir[kMaxDim];
        rng.unit_vector(n, dir);
        const double d = rng.log_uniform(2.01 * r, 10.0 * r);
        for (int d2 = 0; d2 < n; ++d2) c.c[d2] = p.c[d2] + d * dir[d2];
    } else if (snap && !features.empty()) {
        const Pt& p = features[rng.uniform_index(features.size())];
        rng.uniform_in_ball(n, p.data(), 4.0 * r, c.data());
    } else {
        rng.uniform_in_ball(n, region.center.data(), region.radius, c.data());
    }
    return Ball(c, r);
}

} // namespace

A1Report a1_constant_estimate(const ScalarField& w, const PointSet* e, const Ball& region,
                              const A1Options& opt) {
    const int n = region.center.dim;
    const std::vector<Pt> features = w.feature_points();

    struct Slot {
        double ratio = -1.0;
        Ball ball;
    };
    std::vector<Slot> slots(opt.ball_budget);

    auto ball_ratio = [&](const Ball& b, Rng& rng, std::size_t samples) {
        Pt z = Pt::zeros(n);
        std::vector<double> vals(samples);
        double sum = 0.0;
        for (std::size_t j = 0; j < samples; ++j) {
            rng.uniform_in_ball(n, b.center.data(), b.radius, z.data());
            vals[j] = w.eval(z);
            if (vals[j] < 0.0) return -1.0;  // violates the w >= 0 precondition
            sum += vals[j];
        }
        const double avg = sum / static_cast<double>(samples);
        double essinf;
        if (opt.robust_essinf) {
            std::nth_element(vals.begin(), vals.begin() + samples / 100, vals.end());
            essinf = vals[samples / 100];
        } else {
            essinf = *std::min_element(vals.begin(), vals.end());
        }
        if (essinf <= 0.0) essinf = 1e-300;
        return avg / essinf;
    };

    parallel_for(opt.ball_budget, [&](std::size_t i) {
        Rng rng(opt.seed, i);
        Ball b = propose_ball(rng, i, region, e, features, opt);
        if (dist(b.center, region.center) + b.radius > region.radius) return;  // need B inside region
        if (!admissible(b, e)) return;
        if (w.pole_in_ball(b)) return;
        slots[i] = {ball_ratio(b, rng, opt.quad_samples), b};
    });

    // Re-estimate near-critical balls with an 8x budget so the running max is
    // built from low-noise ratios and saturates cleanly when the constant is
    // finite.
    {
        double first_max = 0.0;
        for (const auto& s : slots) first_max = std::max(first_max, s.ratio);
        std::vector<std::size_t> hot;
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i].ratio > 0.5 * first_max) hot.push_back(i);
        parallel_for(hot.size(), [&](std::size_t h) {
            const std::size_t i = hot[h];
            Rng rng(opt.seed ^ 0xafe110, i);
            slots[i].ratio = ball_ratio(slots[i].ball, rng, 8 * opt.quad_samples);
        });
    }

    A1Report rep;
    rep.worst_ball = region;
    // The divergence fit runs on the median of independent substream maxima:
    // a convergent constant saturates in every substream, while an unbounded
    // one keeps heavy-tailed jumps coming in the median curve no matter when
    // any single stream gets lucky.
    constexpr std::size_t kStreams = 8;
    double sub_max[kStreams] = {};
    std::vector<std::pair<std::size_t, double>> median_curve;
    double run_max = 0.0;
    std::size_t next_record = 64;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].ratio >= 0.0) {
            ++rep.admissible_count;
            sub_max[i % kStreams] = std::max(sub_max[i % kStreams], slots[i].ratio);
            if (slots[i].ratio > run_max) {
                run_max = slots[i].ratio;
                rep.worst_ball = slots[i].ball;
            }
        }
        if (i + 1 == next_record || i + 1 == slots.size()) {
            rep.history.emplace_back(i + 1, run_max);
            double sorted[kStreams];
            std::copy(sub_max, sub_max + kStreams, sorted);
            std::sort(sorted, sorted + kStreams);
            median_curve.emplace_back(i + 1, 0.5 * (sorted[3] + sorted[4]));
            next_record *= 2;
        }
    }
    if (rep.admissible_count == 0)
        throw std::domain_error("region inside degeneracy neighborhood");
    rep.constant_estimate = run_max;

    // Slope of log(constant) vs log(budget) over the last decade.
    std::vector<double> xs, ys;
    const double budget_hi = static_cast<double>(rep.history.back().first);
    for (const auto& [count, value] : rep.history) {
        if (value <= 0.0) continue;
        if (static_cast<double>(count) < budget_hi / 10.0 - 0.5) continue;
        xs.push_back(std::log(static_cast<double>(count)));
        ys.push_back(std::log(value));
    }
    if (xs.size() >= 3) {
        const std::size_t m = xs.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < m; ++i) {
            sx += xs[i]; sy += ys[i];
            sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
        }
        const double denom = m * sxx - sx * sx;
        if (denom > 0.0) rep.growth_slope = (m * sxy - sx * sy) / denom;
    }
    // A saturated constant concentrates across the equal-budget substreams;
    // orders-of-magnitude dispersion between the global max and the median
    // stream is the signature of an unbounded ratio whose record jump landed
    // before the fit window.
    const double median_final = median_curve.back().second;
    const double dispersion = median_final > 0.0 ? run_max / median_final : 0.0;
    rep.divergence_flag = rep.growth_slope > opt.divergence_slope || dispersion > 100.0;
    return rep;
}

} // namespace qspace
