#include "qspace/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace qspace {

double ScalarField::eval(const Pt& x) const {
    switch (kind) {
    case FieldKind::constant:
        return prefactor * value;
    case FieldKind::linear: {
        double s = value;
        for (int d = 0; d < dim; ++d) s += coeffs.c[d] * x.c[d];
        return prefactor * s;
    }
    case FieldKind::tent: {
        const double t = radius - dist(x, center);
        return t > 0.0 ? prefactor * amplitude * t : 0.0;
    }
    case FieldKind::tent_sum:
        return prefactor * amplitude *
               kernels::tent_sum_accumulate(tent_centers.view(), x.data(), radius);
    case FieldKind::radial_norm:
        return prefactor * dist(x, center);
    case FieldKind::log_radial: {
        const double r = dist(x, center);
        if (r <= 0.0) throw std::domain_error("pole");
        return prefactor * std::log(r);
    }
    case FieldKind::jacobian:
        return prefactor * map->jacobian_analytic(x);
    case FieldKind::composed:
        return prefactor * inner->eval(map->eval(x));
    }
    return 0.0;
}

double ScalarField::feature_scale() const {
    switch (kind) {
    case FieldKind::tent:
    case FieldKind::tent_sum:
        return radius;
    case FieldKind::jacobian: {
        double finest = 0.0;
        for (const auto& g : map->patches) finest = finest > 0 ? std::min(finest, g.radius) : g.radius;
        return finest;
    }
    case FieldKind::composed: {
        const double h = inner->feature_scale();
        return h;  // conservative: composition may shrink features further
    }
    default:
        return 0.0;
    }
}

double ScalarField::lipschitz() const {
    switch (kind) {
    case FieldKind::constant:
        return 0.0;
    case FieldKind::linear:
        return std::abs(prefactor) * norm(coeffs);
    case FieldKind::tent:
    case FieldKind::tent_sum:
        return std::abs(prefactor * amplitude);
    case FieldKind::radial_norm:
        return std::abs(prefactor);
    default:
        return -1.0;
    }
}

std::vector<Pt> ScalarField::feature_points(std::size_t cap) const {
    std::vector<Pt> pts;
    switch (kind) {
    case FieldKind::tent:
        pts.push_back(center);
        break;
    case FieldKind::tent_sum: {
        const std::size_t n = tent_centers.size();
        const std::size_t step = n <= cap ? 1 : n / cap;
        for (std::size_t i = 0; i < n; i += step) pts.push_back(tent_centers.point(i));
        break;
    }
    case FieldKind::radial_norm:
    case FieldKind::log_radial:
        pts.push_back(center);
        break;
    case FieldKind::jacobian: {
        for (const auto& g : map->patches) {
            const std::size_t n = g.centers.size();
            const std::size_t step = n <= cap ? 1 : n / cap;
            for (std::size_t i = 0; i < n && pts.size() < cap; i += step)
                pts.push_back(g.centers.point(i));
        }
        break;
    }
    case FieldKind::composed: {
        // pull the inner field's features back through the map
        for (const Pt& p : inner->feature_points(cap)) {
            try {
                pts.push_back(map->inverse(p));
            } catch (const std::domain_error&) {
            }
        }
        break;
    }
    default:
        break;
    }
    return pts;
}

bool ScalarField::pole_in_ball(const Ball& b) const {
    if (kind == FieldKind::log_radial) return b.contains(center);
    if (kind == FieldKind::composed) {
        const MapModel& f = *map;
        if (f.kind == MapKind::inversion && b.contains(f.center)) return true;
        if (f.kind == MapKind::radial_power && f.beta < 0.0 && b.contains(f.center)) return true;
        return inner->pole_in_ball(b);  // conservative for nested compositions
    }
    return false;
}

ScalarField ScalarField::dilated(double lambda) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("dilation factor must be positive");
    ScalarField out = *this;
    switch (kind) {
    case FieldKind::constant:
        return out;
    case FieldKind::linear:
        for (int d = 0; d < dim; ++d) out.coeffs.c[d] *= lambda;
        return out;
    case FieldKind::tent:
        // tent_{B(c,rho)}(lambda x) = lambda * tent_{B(c/lambda, rho/lambda)}(x)
        out.center = (1.0 / lambda) * center;
        out.radius = radius / lambda;
        out.amplitude = amplitude * lambda;
        return out;
    case FieldKind::tent_sum: {
        out.tent_centers = PointSet(dim);
        for (std::size_t i = 0; i < tent_centers.size(); ++i)
            out.tent_centers.push((1.0 / lambda) * tent_centers.point(i));
        out.radius = radius / lambda;
        out.amplitude = amplitude * lambda;
        return out;
    }
    default: {
        // generic: compose with the scaling map
        auto scale = std::make_shared<MapModel>(affine_scale_map(lambda, dim));
        return composed_field(std::make_shared<ScalarField>(*this), scale);
    }
    }
}

ScalarField ScalarField::scaled(double factor) const {
    ScalarField out = *this;
    out.prefactor *= factor;
    return out;
}

ScalarField ScalarField::shifted(double constant) const {
    if (kind == FieldKind::constant || kind == FieldKind::linear) {
        ScalarField out = *this;
        out.value += constant;
        return out;
    }
    throw std::invalid_argument("shifted() unsupported for this field kind");
}

ScalarField ScalarField::translated(const Pt& offset) const {
    ScalarField out = *this;
    switch (kind) {
    case FieldKind::constant:
        return out;
    case FieldKind::tent:
        out.center = center + offset;
        return out;
    case FieldKind::tent_sum: {
        out.tent_centers = PointSet(dim);
        for (std::size_t i = 0; i < tent_centers.size(); ++i)
            out.tent_centers.push(tent_centers.point(i) + offset);
        return out;
    }
    case FieldKind::radial_norm:
    case FieldKind::log_radial:
        out.center = center + offset;
        return out;
    default:
        throw std::invalid_argument("translated() unsupported for this field kind");
    }
}

ScalarField constant_field(double c, int n) {
    ScalarField u;
    u.kind = FieldKind::constant;
    u.dim = n;
    u.value = c;
    u.name = "const";
    return u;
}

ScalarField linear_field(const Pt& coeffs, double offset) {
    ScalarField u;
    u.kind = FieldKind::linear;
    u.dim = coeffs.dim;
    u.coeffs = coeffs;
    u.value = offset;
    u.name = "linear";
    return u;
}

ScalarField tent_field(const Ball& b, double amplitude) {
    ScalarField u;
    u.kind = FieldKind::tent;
    u.dim = b.center.dim;
    u.center = b.center;
    u.radius = b.radius;
    u.amplitude = amplitude;
    u.name = "tent";
    return u;
}

ScalarField tent_sum_field(const PointSet& centers, double radius, double amplitude) {
    if (centers.empty()) throw std::invalid_argument("tent_sum needs at least one ball");
    ScalarField u;
    u.kind = FieldKind::tent_sum;
    u.dim = centers.dim();
    u.tent_centers = centers;
    u.radius = radius;
    u.amplitude = amplitude;
    u.name = "tent_sum";
    return u;
}

ScalarField radial_norm_field(const Pt& center) {
    ScalarField u;
    u.kind = FieldKind::radial_norm;
    u.dim = center.dim;
    u.center = center;
    u.name = "radial_norm";
    return u;
}

ScalarField log_radial_field(const Pt& center) {
    ScalarField u;
    u.kind = FieldKind::log_radial;
    u.dim = center.dim;
    u.center = center;
    u.name = "log_radial";
    return u;
}

ScalarField jacobian_field(std::shared_ptr<const MapModel> f) {
    ScalarField u;
    u.kind = FieldKind::jacobian;
    u.dim = f->dim;
    u.map = std::move(f);
    u.name = "jacobian";
    return u;
}

ScalarField composed_field(std::shared_ptr<const ScalarField> u,
                           std::shared_ptr<const MapModel> f) {
    ScalarField v;
    v.kind = FieldKind::composed;
    v.dim = f->dim;
    v.inner = u;
    v.map = std::move(f);
    v.name = v.inner->name + "@" + v.map->describe();
    return v;
}

ScalarField composed_field(const ScalarField& u, const MapModel& f) {
    return composed_field(std::make_shared<ScalarField>(u), std::make_shared<MapModel>(f));
}

} // namespace qspace
