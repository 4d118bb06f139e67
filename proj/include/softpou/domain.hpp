#ifndef SOFTPOU_DOMAIN_HPP
#define SOFTPOU_DOMAIN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "softpou/numeric.hpp"

namespace softpou {

struct CubeDomain {
    std::size_t dim = 1; // points live in [0,1]^dim
};

enum class ManifoldKind { circle, sphere, flat_torus, point_cloud };

std::string to_string(ManifoldKind kind);

// Built-in embedded manifolds plus a point-cloud mode. Built-ins are scaled
// and offset so the default instances fit inside the unit cube.
struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::circle;
    std::size_t ambient_dim = 2;
    std::size_t intrinsic_dim = 1;
    double reach = 0.5;
    double volume = 0.0;          // analytic for built-ins, estimated for clouds
    double radius = 0.5;          // embedding radius of built-ins
    std::vector<double> center;   // embedding offset, length ambient_dim
    std::vector<std::vector<double>> cloud; // point_cloud mode only
    std::size_t knn = 8;          // k-NN graph degree for cloud geodesics

    static ManifoldSpec circle(double radius = 0.5, std::vector<double> center = {0.5, 0.5});
    static ManifoldSpec sphere(double radius = 0.5, std::vector<double> center = {0.5, 0.5, 0.5});
    static ManifoldSpec flat_torus(double radius = 0.5);
    static ManifoldSpec point_cloud(std::vector<std::vector<double>> points,
                                    std::size_t intrinsic_dim, double reach,
                                    std::size_t knn = 8);

    void validate() const;
};

using Domain = std::variant<CubeDomain, ManifoldSpec>;

std::size_t domain_dim(const Domain& domain);
bool domain_is_manifold(const Domain& domain);
std::string domain_tag(const Domain& domain);

struct Covering {
    std::vector<std::vector<double>> centers;
    double radius = 0.0; // r_g
    std::string kind;    // domain tag
    std::size_t count() const { return centers.size(); }
};

// Midpoints of a uniform grid of cells with side 2*radius/sqrt(dim), clamped
// to the unit cube; every point of [0,1]^dim lies within `radius` of a center
// and the count is ceil(sqrt(dim)/(2*radius))^dim exactly.
Covering grid_covering(std::size_t dim, double radius);

// Deterministic parametric coverings of the built-in manifolds; greedy
// farthest-point net for point clouds. Requires 0 < radius <= reach/2.
Covering manifold_covering(const ManifoldSpec& spec, double radius);

// Duplicates the center of a singleton covering so downstream sequence
// lengths satisfy P >= 2. Identity for count >= 2.
Covering pad_covering(Covering covering);

// Intrinsic distance. Built-ins are closed-form (arc, great circle, wrapped
// product); point clouds use shortest paths over the k-NN graph. Inputs must
// lie on the manifold within 1e-9.
double geodesic_distance(const ManifoldSpec& spec, std::span<const double> x,
                         std::span<const double> y);

double euclidean_distance(std::span<const double> x, std::span<const double> y);

// Uniform sample on the domain (area-uniform for built-ins).
std::vector<double> sample_domain_point(const Domain& domain, class Rng& rng);

// Deterministic well-spread scan set: dense grids for cubes d<=2, Sobol for
// higher-dimensional cubes, parametric/Fibonacci sets on built-in manifolds,
// the cloud itself in point-cloud mode. Size may round up slightly for grids.
std::vector<std::vector<double>> scan_points(const Domain& domain, std::size_t n,
                                             std::uint64_t seed);

struct CoverReport {
    double max_gap = 0.0;
    bool ok = false;
    std::size_t samples = 0;
};

// Empirical covering certificate: quasi-random scan of the domain, max
// distance to the nearest center compared against covering.radius.
CoverReport verify_covering(const Covering& covering, const Domain& domain,
                            std::size_t n_samples, std::uint64_t seed);

struct MetricReport {
    std::size_t pairs = 0;
    std::size_t violations = 0;
    double worst_ratio = 0.0; // max over pairs of geodesic / (2 * euclidean)
    bool ok = false;
};

// Samples point pairs with ||x-y|| <= reach/2 and asserts
// geodesic(x,y) <= 2*||x-y|| with 1e-9 slack (built-ins only).
MetricReport check_metric_equivalence(const ManifoldSpec& spec, std::size_t n_pairs,
                                      std::uint64_t seed);

} // namespace softpou

#endif
