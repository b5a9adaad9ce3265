#include "qspace/fractal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "qspace/parallel.hpp"
#include "qspace/rng.hpp"

namespace qspace {

namespace {

using Cell = std::array<std::int64_t, kMaxDim>;

std::size_t count_cells(double r, const PointSet& e, const std::uint32_t* idx, std::size_t m) {
    const int dim = e.dim();
    const double inv = 1.0 / r;
    if (dim == 1) {
        // Point sets are kept sorted, so 1-D occupied cells fall out of a
        // linear scan; fall back to sorting if the slice is unordered.
        std::int64_t prev = 0;
        std::size_t count = 0;
        bool ordered = true;
        double prev_x = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < m; ++t) {
            const std::size_t i = idx ? idx[t] : t;
            const double x = e.coord(0, i);
            if (x < prev_x) {
                ordered = false;
                break;
            }
            prev_x = x;
            const auto cell = static_cast<std::int64_t>(std::floor(x * inv));
            if (count == 0 || cell != prev) {
                ++count;
                prev = cell;
            }
        }
        if (ordered) return count;
    }
    std::vector<Cell> cells(m);
    for (std::size_t t = 0; t < m; ++t) {
        const std::size_t i = idx ? idx[t] : t;
        Cell c{};
        for (int d = 0; d < dim; ++d)
            c[d] = static_cast<std::int64_t>(std::floor(e.coord(d, i) * inv));
        cells[t] = c;
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells.size();
}

// Exact 1-D minimum cover by closed intervals of length r: greedy from the left.
std::size_t exact_cover_1d(std::vector<double> xs, double r) {
    std::sort(xs.begin(), xs.end());
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < xs.size()) {
        const double right = xs[i] + r;
        ++count;
        while (i < xs.size() && xs[i] <= right) ++i;
    }
    return count;
}

// Exact 2-D minimum cover by closed r-cubes via canonical corner candidates
// and branch-and-bound set cover over <= 64 points.
std::size_t exact_cover_2d(const PointSet& e, double r) {
    const std::size_t n = e.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = e.coord(0, i);
        ys[i] = e.coord(1, i);
    }
    // A minimal cover exists with each cube's min corner at some (x_i, y_j).
    std::vector<std::uint64_t> masks;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            std::uint64_t mask = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (xs[i] >= xs[a] && xs[i] <= xs[a] + r && ys[i] >= ys[b] && ys[i] <= ys[b] + r)
                    mask |= std::uint64_t{1} << i;
            }
            if (mask) masks.push_back(mask);
        }
    }
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    // Drop candidates dominated by a superset candidate.
    std::vector<std::uint64_t> cands;
    for (std::uint64_t m : masks) {
        bool dominated = false;
        for (std::uint64_t other : masks)
            if (other != m && (other & m) == m) { dominated = true; break; }
        if (!dominated) cands.push_back(m);
    }

    const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    std::size_t best = n;  // one cube per point always works

    // Greedy upper bound first.
    {
        std::uint64_t covered = 0;
        std::size_t used = 0;
        while (covered != full) {
            std::uint64_t pick = 0;
            int gain = -1;
            for (std::uint64_t m : cands) {
                const int g = __builtin_popcountll(m & ~covered);
                if (g > gain) { gain = g; pick = m; }
            }
            covered |= pick;
            ++used;
        }
        best = std::min(best, used);
    }

    struct Search {
        const std::vector<std::uint64_t>& cands;
        std::uint64_t full;
        std::size_t& best;
        void run(std::uint64_t covered, std::size_t used) {
            if (covered == full) {
                best = std::min(best, used);
                return;
            }
            if (used + 1 >= best) return;
            // Branch on the uncovered point with the fewest covering candidates.
            int pick_bit = -1;
            std::size_t fewest = SIZE_MAX;
            std::uint64_t rest = full & ~covered;
            while (rest) {
                const int bit = __builtin_ctzll(rest);
                rest &= rest - 1;
                std::size_t c = 0;
                for (std::uint64_t m : cands)
                    if (m & (std::uint64_t{1} << bit)) ++c;
                if (c < fewest) { fewest = c; pick_bit = bit; }
            }
            for (std::uint64_t m : cands) {
                if (m & (std::uint64_t{1} << pick_bit)) run(covered | m, used + 1);
            }
        }
    };
    Search{cands, full, best}.run(0, 0);
    return best;
}

} // namespace

std::size_t covering_number(double r, const PointSet& e, CoverMode mode) {
    if (e.empty()) throw std::invalid_argument("empty set");
    if (!(r > 0.0)) throw std::invalid_argument("covering scale must be positive");
    if (mode == CoverMode::grid) return count_cells(r, e, nullptr, e.size());

    if (e.size() > 64 || e.dim() > 2)
        throw std::invalid_argument("instance too large for exact mode");
    if (e.dim() == 1) {
        std::vector<double> xs(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) xs[i] = e.coord(0, i);
        return exact_cover_1d(std::move(xs), r);
    }
    return exact_cover_2d(e, r);
}

std::size_t covering_number_subset(double r, const PointSet& e,
                                   const std::vector<std::uint32_t>& idx) {
    if (idx.empty()) return 0;
    return count_cells(r, e, idx.data(), idx.size());
}

DimensionEstimate dim_minkowski(const PointSet& e, double r_min, double r_max, int n_scales) {
    if (e.empty()) throw std::invalid_argument("empty set");
    if (!(r_min > 0.0) || !(r_max > r_min)) throw std::invalid_argument("bad scale range");
    if (n_scales < 3) throw std::invalid_argument("insufficient scale range");

    std::vector<double> xs, ys;
    const double step = std::pow(r_max / r_min, 1.0 / (n_scales - 1));
    double r = r_max;
    for (int s = 0; s < n_scales; ++s, r /= step) {
        const std::size_t c = covering_number(r, e, CoverMode::grid);
        xs.push_back(std::log(1.0 / r));
        ys.push_back(std::log(static_cast<double>(c)));
    }
    if (xs.size() < 3) throw std::invalid_argument("insufficient scale range");

    const std::size_t m = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += xs[i]; sy += ys[i];
        sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i]; syy += ys[i] * ys[i];
    }
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    const double var_y = m * syy - sy * sy;
    const double r2 = var_y > 0 ? (m * sxy - sx * sy) * (m * sxy - sx * sy) / (denom * var_y) : 1.0;

    DimensionEstimate est;
    est.value = std::clamp(slope, 0.0, static_cast<double>(e.dim()));
    est.r_min = r_min;
    est.r_max = r_max;
    est.regression_r2 = r2;
    est.per_n_values = {};
    return est;
}

namespace {

struct LadderFit {
    double slope = 0.0;
    double r2 = 0.0;
    bool informative = false;
};

// Covering counts across the dyadic ladder r = r_B/2, r_B/4, ... down to
// r_floor_abs, computed once per ball; per-N fits reuse prefixes.
struct BallLadder {
    std::vector<double> log_ratio;   // log(r_B / r)
    std::vector<double> log_count;
    std::vector<std::size_t> counts;
};

BallLadder ladder_counts(const PointSet& e, const Ball& ball, double r_floor_abs) {
    BallLadder lad;
    const auto idx = points_in_ball(e, ball);
    if (idx.empty()) return lad;
    double r = 0.5 * ball.radius;
    while (r >= r_floor_abs) {
        const std::size_t c = covering_number_subset(r, e, idx);
        lad.counts.push_back(c);
        lad.log_ratio.push_back(std::log(ball.radius / r));
        lad.log_count.push_back(std::log(static_cast<double>(c)));
        r *= 0.5;
        if (lad.counts.size() > 80) break;
    }
    return lad;
}

// Least-squares fit over the first `depth` ladder scales.
LadderFit ladder_fit(const BallLadder& lad, std::size_t depth, int min_scales,
                     std::size_t min_count) {
    LadderFit fit;
    depth = std::min(depth, lad.counts.size());
    if (static_cast<int>(depth) < min_scales) return fit;
    if (lad.counts[depth - 1] < min_count) return fit;  // counts grow with depth

    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < depth; ++i) {
        const double x = lad.log_ratio[i], y = lad.log_count[i];
        sx += x; sy += y;
        sxx += x * x; sxy += x * y; syy += y * y;
    }
    const double m = static_cast<double>(depth);
    const double denom = m * sxx - sx * sx;
    if (denom <= 0) return fit;
    fit.slope = (m * sxy - sx * sy) / denom;
    const double var_y = m * syy - sy * sy;
    fit.r2 = var_y > 0 ? (m * sxy - sx * sy) * (m * sxy - sx * sy) / (denom * var_y) : 1.0;
    fit.informative = true;
    return fit;
}

struct BallFamily {
    std::vector<Ball> balls;
};

BallFamily local_family(const PointSet& e, const DimensionOptions& opt, double r_floor) {
    BallFamily fam;
    const Cube box = e.bounding_box();
    const int dim = e.dim();
    const double r_lo = 8.0 * std::max(r_floor, 1e-9 * box.edge);
    const double r_hi = opt.local_cutoff;
    if (r_lo >= r_hi) return fam;
    Rng rng(opt.seed, 0x10ca1);
    for (int b = 0; b < opt.ball_budget; ++b) {
        const double r = rng.log_uniform(r_lo, r_hi);
        Pt c = Pt::zeros(dim);
        if (b % 2 == 0 && !e.empty()) {
            const auto i = rng.uniform_index(e.size());
            Pt base = e.point(i);
            rng.uniform_in_ball(dim, base.data(), 0.5 * r, c.data());
        } else {
            for (int d = 0; d < dim; ++d)
                c.c[d] = rng.uniform(box.min_corner.c[d], box.min_corner.c[d] + box.edge);
        }
        c.dim = dim;
        fam.balls.emplace_back(c, r);
    }
    return fam;
}

BallFamily global_family(const PointSet& e, const DimensionOptions& opt, double r_floor) {
    BallFamily fam;
    const int dim = e.dim();
    const Pt anchor = e.meta().anchor.dim == dim ? e.meta().anchor : e.bounding_box().min_corner;
    const double extent = e.extent();
    const double r_lo = 8.0 * std::max(r_floor, 1e-12 * extent);
    const double r_hi = 2.0 * extent;
    if (r_lo >= r_hi) return fam;

    // Deterministic radius sweep at the anchor plus jittered companions.
    const int sweep = std::max(4, opt.ball_budget / 2);
    for (int s = 0; s < sweep; ++s) {
        const double r = r_hi * std::pow(r_lo / r_hi, static_cast<double>(s) / (sweep - 1));
        fam.balls.emplace_back(anchor, r);
    }
    Rng rng(opt.seed, 0x610ba1);
    for (int b = sweep; b < opt.ball_budget; ++b) {
        const double r = rng.log_uniform(r_lo, r_hi);
        Pt c = Pt::zeros(dim);
        rng.uniform_in_ball(dim, anchor.data(), r / 8.0, c.data());
        fam.balls.emplace_back(c, r);
    }
    return fam;
}

std::vector<double> adaptive_n_list(const PointSet& e) {
    std::vector<double> ns;
    const double floor_scale = e.meta().r_floor > 0 ? e.meta().r_floor : 1e-6 * e.extent();
    const double n_max = std::max(16.0, 2.0 * e.extent() / floor_scale);
    for (double v = 4.0; v <= n_max; v *= 4.0) ns.push_back(v);
    return ns;
}

DimensionEstimate selfsim_estimate(const PointSet& e, const DimensionOptions& in_opt, bool global) {
    if (e.empty()) throw std::invalid_argument("empty set");
    DimensionOptions opt = in_opt;
    if (opt.n_list.empty()) opt.n_list = adaptive_n_list(e);
    const double r_floor = e.meta().r_floor;
    const BallFamily fam = global ? global_family(e, opt, r_floor)
                                  : local_family(e, opt, r_floor);

    DimensionEstimate est;
    est.ball_budget = opt.ball_budget;

    // Counts are computed once per ball down to the deepest floor any N
    // needs; per-N fits reuse ladder prefixes.
    const double n_max = *std::max_element(opt.n_list.begin(), opt.n_list.end());
    std::vector<BallLadder> ladders(fam.balls.size());
    parallel_for(fam.balls.size(), [&](std::size_t bi) {
        const Ball& ball = fam.balls[bi];
        const double floor_abs = std::max(r_floor, ball.radius / n_max);
        if (floor_abs <= 0.0 || floor_abs > 0.5 * ball.radius) return;
        ladders[bi] = ladder_counts(e, ball, floor_abs);
    });

    // Per N, read the slope off the deepest informative window (ties broken
    // by covering mass). Shallow windows are pre-asymptotic and systematically
    // overshoot on sets that mix scaling regimes; the deepest available ladder
    // is the closest realization of the r -> 0 limit the truncation supports.
    struct PerN {
        double slope = -1.0;
        double r2 = 0.0;
        std::size_t depth = 0;
        std::size_t peak = 0;
        double used_rmin = 0.0, used_rmax = 0.0;
    };
    std::vector<PerN> acc(opt.n_list.size());
    for (std::size_t ni = 0; ni < opt.n_list.size(); ++ni) {
        const double big_n = opt.n_list[ni];
        const double depth_d = std::floor(std::log2(big_n));
        if (depth_d < 1.0) continue;
        const auto depth_cap = static_cast<std::size_t>(depth_d);
        // pass 1: deepest informative window depth
        std::size_t max_depth = 0;
        for (std::size_t bi = 0; bi < ladders.size(); ++bi) {
            const std::size_t depth = std::min(depth_cap, ladders[bi].counts.size());
            if (ladder_fit(ladders[bi], depth, opt.min_scales, opt.min_count).informative)
                max_depth = std::max(max_depth, depth);
        }
        if (max_depth == 0) continue;
        // pass 2: sup over the windows within one octave of the deepest
        for (std::size_t bi = 0; bi < ladders.size(); ++bi) {
            const std::size_t depth = std::min(depth_cap, ladders[bi].counts.size());
            if (depth + 1 < max_depth) continue;
            const LadderFit fit = ladder_fit(ladders[bi], depth, opt.min_scales, opt.min_count);
            if (!fit.informative) continue;
            if (fit.slope > acc[ni].slope) {
                acc[ni].slope = fit.slope;
                acc[ni].r2 = fit.r2;
                acc[ni].depth = depth;
                acc[ni].peak = ladders[bi].counts[depth - 1];
                acc[ni].used_rmax = fam.balls[bi].radius;
                acc[ni].used_rmin = std::max(r_floor, fam.balls[bi].radius / big_n);
            }
        }
    }

    double value = std::numeric_limits<double>::infinity();
    for (std::size_t ni = 0; ni < opt.n_list.size(); ++ni) {
        if (acc[ni].slope < 0.0) {
            ++est.dropped_n;
            continue;
        }
        est.per_n_values.emplace_back(opt.n_list[ni], acc[ni].slope);
        if (acc[ni].slope < value) {
            value = acc[ni].slope;
            est.regression_r2 = acc[ni].r2;
            est.r_min = acc[ni].used_rmin;
            est.r_max = acc[ni].used_rmax;
        }
    }
    if (est.per_n_values.empty()) {
        // No window resolves enough covering mass: the truncated set is
        // indistinguishable from a finite point set, whose dimension is 0.
        est.no_informative_balls = true;
        est.value = 0.0;
        return est;
    }
    est.value = std::clamp(value, 0.0, static_cast<double>(e.dim()));
    return est;
}

} // namespace

DimensionEstimate dim_local_selfsim(const PointSet& e, const DimensionOptions& opt) {
    return selfsim_estimate(e, opt, false);
}

DimensionEstimate dim_global_selfsim(const PointSet& e, const DimensionOptions& opt) {
    return selfsim_estimate(e, opt, true);
}

} // namespace qspace
