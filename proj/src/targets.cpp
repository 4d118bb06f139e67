#include "softpou/targets.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace softpou {

namespace {
constexpr double kPi = std::numbers::pi;
}

HolderTarget make_sin1d() {
    HolderTarget t;
    t.name = "sin1d";
    t.domain = CubeDomain{1};
    t.eval = [](std::span<const double> x) { return std::sin(2.0 * kPi * x[0]) / (2.0 * kPi); };
    t.alpha = 1.0;
    t.holder_const = 1.0;
    t.sup_bound = 1.0 / (2.0 * kPi);
    return t;
}

HolderTarget make_quad2d() {
    HolderTarget t;
    t.name = "quad2d";
    t.domain = CubeDomain{2};
    t.eval = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += (v - 0.5) * (v - 0.5);
        return s / double(x.size());
    };
    t.alpha = 1.0;
    t.holder_const = 1.0 / std::sqrt(2.0); // sup |grad| = 2*max|x-0.5|/d = 1/sqrt(d)
    t.sup_bound = 0.25;
    return t;
}

HolderTarget make_circle_angle() {
    HolderTarget t;
    t.name = "circle_angle";
    auto spec = ManifoldSpec::circle();
    const std::vector<double> marked = {spec.center[0] + spec.radius, spec.center[1]};
    t.domain = spec;
    t.eval = [spec, marked](std::span<const double> x) {
        return geodesic_distance(spec, x, marked) / kPi;
    };
    t.alpha = 1.0;
    t.holder_const = 1.0 / kPi; // distance functions are 1-Lipschitz in the geodesic metric
    t.sup_bound = spec.radius;  // max geodesic distance is pi*R
    return t;
}

HolderTarget make_sphere_zonal() {
    HolderTarget t;
    t.name = "sphere_zonal";
    t.domain = ManifoldSpec::sphere();
    t.eval = [](std::span<const double> x) { return x[0]; };
    t.alpha = 1.0;
    t.holder_const = 1.0; // |x_1 - y_1| <= ||x-y|| <= geodesic
    t.sup_bound = 1.0;
    return t;
}

HolderTarget make_scaled_sine(double scale) {
    HolderTarget t;
    t.name = "sine_scaled";
    t.domain = CubeDomain{1};
    t.eval = [scale](std::span<const double> x) { return scale * std::sin(2.0 * kPi * x[0]); };
    t.alpha = 1.0;
    t.holder_const = 2.0 * kPi * std::abs(scale);
    t.sup_bound = std::abs(scale);
    return t;
}

HolderTarget make_table_target(const std::vector<std::vector<double>>& points,
                               const std::vector<double>& values, double alpha,
                               double holder_const, double sup_bound, Domain domain,
                               std::string name) {
    if (points.empty() || points.size() != values.size())
        throw std::invalid_argument("table target: points/values must be non-empty and equal length");
    const std::size_t dim = domain_dim(domain);
    for (const auto& p : points)
        if (p.size() != dim)
            throw std::invalid_argument("table target: point dimension does not match domain");
    HolderTarget t;
    t.name = std::move(name);
    t.domain = std::move(domain);
    t.eval = [points, values](std::span<const double> x) {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double d = euclidean_distance(x, points[i]);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return values[best];
    };
    t.alpha = alpha;
    t.holder_const = holder_const;
    t.sup_bound = sup_bound;
    return t;
}

HolderTarget target_by_name(const std::string& name) {
    if (name == "sin1d") return make_sin1d();
    if (name == "quad2d") return make_quad2d();
    if (name == "circle_angle") return make_circle_angle();
    if (name == "sphere_zonal") return make_sphere_zonal();
    throw std::invalid_argument("unknown target '" + name +
                                "'; built-ins: sin1d, quad2d, circle_angle, sphere_zonal");
}

std::vector<std::string> builtin_target_names() {
    return {"sin1d", "quad2d", "circle_angle", "sphere_zonal"};
}

} // namespace softpou
