#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qspace/geometry.hpp"
#include "qspace/pointset.hpp"

namespace qspace {

enum class MapKind {
    identity,
    radial_power,   // f(x) = |x-c|^{beta-1} (x-c) + c  (radial profile r -> r^beta)
    inversion,      // f(x) = (x-c)/|x-c|^2 + c
    affine_scale,   // f(x) = lambda * x
    cantor_patch,   // boundary-normalized radial stretch in every Cantor patch ball
    lattice_patch,  // same stretch in balls about lattice points
};

// A group of pairwise disjoint patch balls sharing one radius. Inside a patch,
// f(x) = R^{-beta} |x-z|^beta (x-z) + z, the identity on the patch sphere
// (radial profile r -> R (r/R)^{beta+1}).
struct PatchGroup {
    double radius = 0.0;
    PointSet centers;
};

class MapModel {
public:
    MapKind kind = MapKind::identity;
    int dim = 0;
    double beta = 1.0;    // stretch exponent (radial kinds), scale for affine_scale
    Pt center;            // radial_power / inversion center
    std::vector<PatchGroup> patches;

    std::string describe() const;

    Pt eval(const Pt& x) const;
    Pt inverse(const Pt& y) const;

    // |det Df(x)| from the closed-form radial profile.
    double jacobian_analytic(const Pt& x) const;
    // Determinant modulus of the central-difference derivative matrix.
    double jacobian_fd(const Pt& x, double* op_norm = nullptr) const;

    bool is_pole(const Pt& x) const;

    // Distance from x to the nearest patch sphere (patched kinds). Used to
    // nudge finite-difference stencils off the non-smooth boundary.
    double patch_sphere_gap(const Pt& x) const;
};

MapModel identity_map(int n);
MapModel radial_power_map(double beta, const Pt& center);
MapModel inversion_map(const Pt& center);
MapModel affine_scale_map(double lambda, int n);

// The Theorem-style Cantor construction map: radial stretches of exponent
// beta in the balls B(z_{m,j}, (a/2) ((1-a)/2)^m), identity elsewhere.
MapModel cantor_patch_map(double a, double beta, int m_max, int n);

enum class LatticeFamily { three_n, lattice_theta };

// Radial stretches about the points of (3N)^n or (2^{N_theta})^n within
// max-norm extent; patch_radius must not exceed half the minimal gap.
MapModel lattice_patch_map(LatticeFamily family, double theta, double beta, double extent,
                           double patch_radius, int n);

// sup of |f(z) - f(w)| over n_dirs quasi-uniform directions w on the sphere
// |z-w| = r.
double local_distortion(const MapModel& f, const Pt& z, double r, int n_dirs);

struct DistortionReport {
    double k_estimate = 1.0;
    std::size_t sample_count = 0;
    std::size_t skipped = 0;   // near-zero Jacobian samples
    Pt worst_point;
};

// max over samples of |Df(x)|^n / J_f(x) with |Df| the operator norm of the
// finite-difference derivative.
DistortionReport qc_dilatation_estimate(const MapModel& f, const Ball& region,
                                        std::size_t n_samples, std::uint64_t seed);

} // namespace qspace
