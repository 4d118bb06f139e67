#ifndef SOFTPOU_TARGETS_HPP
#define SOFTPOU_TARGETS_HPP

#include <string>
#include <vector>

#include "softpou/pou.hpp"

namespace softpou {

// Built-in targets with analytically certified (alpha, C_H, B):
//   sin1d        g(x) = sin(2 pi x) / (2 pi)           cube d=1, C_H = 1, B = 1/(2 pi)
//   quad2d       g(x) = |x - 0.5*1|^2 / d              cube d=2, C_H = 1/sqrt(d), B = 1/4
//   circle_angle g = geodesic distance to a marked point / pi   C_H = 1/pi, B = R
//   sphere_zonal g(x) = x_1 (ambient first coordinate)          C_H = 1, B = 1
HolderTarget make_sin1d();
HolderTarget make_quad2d();
HolderTarget make_circle_angle();
HolderTarget make_sphere_zonal();

// Sine target with tunable amplitude: g(x) = sin(2 pi x) * scale, certified
// C_H = 2 pi |scale|, B = |scale|. Used for small-P constructions.
HolderTarget make_scaled_sine(double scale);

// Lookup-table target: nearest-table-point evaluator with user-declared
// constants. The declared certificate is spot-checked at load.
HolderTarget make_table_target(const std::vector<std::vector<double>>& points,
                               const std::vector<double>& values, double alpha,
                               double holder_const, double sup_bound, Domain domain,
                               std::string name = "custom");

HolderTarget target_by_name(const std::string& name);
std::vector<std::string> builtin_target_names();

} // namespace softpou

#endif
