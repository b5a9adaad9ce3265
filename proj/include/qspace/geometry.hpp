#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "qspace/kernels.hpp"

namespace qspace {

inline constexpr int kMaxDim = kernels::kMaxDim;

// Fixed-capacity point; the ambient dimension is set once per experiment.
struct Pt {
    std::array<double, kMaxDim> c{};
    int dim = 0;

    Pt() = default;
    Pt(std::initializer_list<double> xs) {
        if (xs.size() > kMaxDim) throw std::invalid_argument("dimension too large");
        dim = static_cast<int>(xs.size());
        int i = 0;
        for (double x : xs) c[i++] = x;
    }
    static Pt zeros(int n) {
        Pt p;
        p.dim = n;
        return p;
    }
    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }
    const double* data() const { return c.data(); }
    double* data() { return c.data(); }
};

inline double dist_sq(const Pt& a, const Pt& b) {
    double s = 0.0;
    for (int d = 0; d < a.dim; ++d) {
        const double t = a.c[d] - b.c[d];
        s += t * t;
    }
    return s;
}

inline double dist(const Pt& a, const Pt& b) { return std::sqrt(dist_sq(a, b)); }

inline double norm(const Pt& a) {
    double s = 0.0;
    for (int d = 0; d < a.dim; ++d) s += a.c[d] * a.c[d];
    return std::sqrt(s);
}

inline Pt operator+(Pt a, const Pt& b) {
    for (int d = 0; d < a.dim; ++d) a.c[d] += b.c[d];
    return a;
}
inline Pt operator-(Pt a, const Pt& b) {
    for (int d = 0; d < a.dim; ++d) a.c[d] -= b.c[d];
    return a;
}
inline Pt operator*(double s, Pt a) {
    for (int d = 0; d < a.dim; ++d) a.c[d] *= s;
    return a;
}

struct Ball {
    Pt center;
    double radius = 0.0;

    Ball() = default;
    Ball(Pt c, double r) : center(c), radius(r) {
        if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
    }
    bool contains(const double* x) const {
        double s = 0.0;
        for (int d = 0; d < center.dim; ++d) {
            const double t = x[d] - center.c[d];
            s += t * t;
        }
        return s <= radius * radius;
    }
    bool contains(const Pt& x) const { return contains(x.data()); }
    Ball scaled(double lambda) const { return Ball(center, lambda * radius); }
    double volume() const;
};

// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

// Axis-aligned cube given by its minimal corner and edge length.
struct Cube {
    Pt min_corner;
    double edge = 0.0;

    Cube() = default;
    Cube(Pt corner, double e) : min_corner(corner), edge(e) {
        if (!(e > 0.0)) throw std::invalid_argument("cube edge must be positive");
    }
    int dim() const { return min_corner.dim; }
    Pt center() const {
        Pt p = min_corner;
        for (int d = 0; d < p.dim; ++d) p.c[d] += 0.5 * edge;
        return p;
    }
    bool contains(const Pt& x) const {
        for (int d = 0; d < dim(); ++d)
            if (x.c[d] < min_corner.c[d] || x.c[d] > min_corner.c[d] + edge) return false;
        return true;
    }
    // Concentric scaling: lambda * Q has edge lambda * edge.
    Cube scaled(double lambda) const {
        Cube q;
        q.edge = lambda * edge;
        q.min_corner = min_corner;
        q.min_corner.dim = min_corner.dim;
        for (int d = 0; d < dim(); ++d)
            q.min_corner.c[d] = min_corner.c[d] + 0.5 * (edge - q.edge);
        return q;
    }
};

// Distance from a point to (the closure of) a cube; 0 if inside.
inline double dist_point_to_cube(const Pt& x, const Cube& q) {
    double s = 0.0;
    for (int d = 0; d < q.dim(); ++d) {
        const double lo = q.min_corner.c[d];
        const double hi = lo + q.edge;
        double t = 0.0;
        if (x.c[d] < lo) t = lo - x.c[d];
        else if (x.c[d] > hi) t = x.c[d] - hi;
        s += t * t;
    }
    return std::sqrt(s);
}

inline bool cubes_touch(const Cube& a, const Cube& b, double tol = 1e-12) {
    for (int d = 0; d < a.dim(); ++d) {
        const double alo = a.min_corner.c[d], ahi = alo + a.edge;
        const double blo = b.min_corner.c[d], bhi = blo + b.edge;
        if (alo > bhi + tol || blo > ahi + tol) return false;
    }
    return true;
}

} // namespace qspace
