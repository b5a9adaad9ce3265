#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qspace/geometry.hpp"
#include "qspace/maps.hpp"
#include "qspace/pointset.hpp"

namespace qspace {

enum class FieldKind {
    constant,
    linear,        // a . x + b
    tent,          // amplitude * max(0, rho - |x - c|)  (amplitude 1 = chi_B d(x, dB))
    tent_sum,      // sum of tents on pairwise disjoint balls of one radius
    radial_norm,   // |x - c|
    log_radial,    // log |x - c|
    jacobian,      // J_f(x) of a map model (analytic)
    composed,      // inner(f(x))
};

// Exact closed-form scalar field on R^n.
class ScalarField {
public:
    FieldKind kind = FieldKind::constant;
    int dim = 0;
    std::string name = "field";

    double prefactor = 1.0;      // global multiplier applied to every kind
    double value = 0.0;          // constant c / linear offset b
    Pt coeffs;                   // linear coefficients a
    Pt center;                   // tent / radial_norm / log_radial center
    double radius = 0.0;         // tent radius
    double amplitude = 1.0;      // tent amplitude
    PointSet tent_centers;       // tent_sum centers (common radius/amplitude)
    std::shared_ptr<const MapModel> map;          // jacobian / composed
    std::shared_ptr<const ScalarField> inner;     // composed

    double eval(const Pt& x) const;
    double operator()(const Pt& x) const { return eval(x); }

    // Finest feature scale (tent radius, patch radius); 0 when smooth.
    double feature_scale() const;
    // Lipschitz constant if known exactly, else a negative sentinel.
    double lipschitz() const;
    // Centers the seminorm ball samplers should snap to.
    std::vector<Pt> feature_points(std::size_t cap = 64) const;
    // True if evaluating u on B would hit a pole of a composing map.
    bool pole_in_ball(const Ball& b) const;

    // u(lambda . x) as a field of the same family (tents rescale exactly).
    ScalarField dilated(double lambda) const;
    ScalarField scaled(double factor) const;      // factor * u (any kind)
    ScalarField shifted(double constant) const;   // u + c
    ScalarField translated(const Pt& offset) const;  // u(x - offset)
};

ScalarField constant_field(double c, int n);
ScalarField linear_field(const Pt& coeffs, double offset = 0.0);
ScalarField tent_field(const Ball& b, double amplitude = 1.0);
ScalarField tent_sum_field(const PointSet& centers, double radius, double amplitude = 1.0);
ScalarField radial_norm_field(const Pt& center);
ScalarField log_radial_field(const Pt& center);
ScalarField jacobian_field(std::shared_ptr<const MapModel> f);
ScalarField composed_field(std::shared_ptr<const ScalarField> u,
                           std::shared_ptr<const MapModel> f);
ScalarField composed_field(const ScalarField& u, const MapModel& f);

} // namespace qspace
