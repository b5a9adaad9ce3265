#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qspace/geometry.hpp"

namespace qspace {

// Generator provenance. r_floor is the finest scale at which the truncation
// still represents the ideal set: covering counts below it are truncation
// artifacts for Cantor-type sets and ordinary saturation for integer lattices.
struct GeneratorMeta {
    std::string kind = "explicit";
    std::vector<std::pair<std::string, double>> params;
    double r_floor = 0.0;
    bool bounded = true;
    Pt anchor;   // expansion anchor of the ideal set; global ball families are rooted here

    double param(const std::string& name, double fallback = 0.0) const {
        for (const auto& [k, v] : params)
            if (k == name) return v;
        return fallback;
    }
};

class PointSet {
public:
    PointSet() = default;
    explicit PointSet(int dim);

    int dim() const { return dim_; }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    void push(const Pt& p);
    void push(const double* x);
    // Sorts lexicographically and removes exact duplicates.
    void dedupe();

    Pt point(std::size_t i) const;
    double coord(int d, std::size_t i) const { return coords_[d][i]; }

    kernels::PointsView view() const;

    GeneratorMeta& meta() { return meta_; }
    const GeneratorMeta& meta() const { return meta_; }

    Cube bounding_box() const;   // tight axis-aligned box (edge = max side)
    double extent() const;       // diameter of the bounding box

    void save(std::ostream& os) const;
    static PointSet load(std::istream& is);

private:
    int dim_ = 0;
    std::size_t count_ = 0;
    std::vector<double> coords_[kMaxDim];
    GeneratorMeta meta_;
};

// min over p in E of |x - p|; throws on empty E ("empty set").
double dist_to_set(const Pt& x, const PointSet& e);

// Indices of the points of E inside the closed ball.
std::vector<std::uint32_t> points_in_ball(const PointSet& e, const Ball& b);

// --- Generators -----------------------------------------------------------

// (union over k <= k_max of A_{k,theta})^n with
// A_{k,theta} = {2^k, 2^k + 1, ..., 2^k + 2^floor(theta*k)}.
PointSet gen_lattice_theta(double theta, int k_max, int n);

struct CantorConstruction {
    PointSet centers;                          // z_0 plus all z_{m,j}, m <= m_max
    std::vector<std::vector<Cube>> levels;     // levels[m-1] = the 2^{mn} cubes Q_{m,j}
};

// Centers and pre-cubes of the middle-interval Cantor construction with gap
// ratio a; level-m cubes have edge ((1-a)/2)^m.
CantorConstruction gen_cantor_centers(double a, int m_max, int n);

// Union over k <= k_max of (2/(1-a))^k * E_a.
PointSet gen_cantor_extension(double a, int m_max, int k_max, int n);

} // namespace qspace
