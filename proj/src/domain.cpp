#include "softpou/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "parallel.hpp"
#include "rng.hpp"

namespace softpou {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOnManifoldTol = 1e-9;

double sq(double x) { return x * x; }

// Angle of an ambient point relative to the circle center.
double circle_angle_of(const ManifoldSpec& spec, std::span<const double> p) {
    return std::atan2(p[1] - spec.center[1], p[0] - spec.center[0]);
}

std::vector<double> circle_point(const ManifoldSpec& spec, double theta) {
    return {spec.center[0] + spec.radius * std::cos(theta),
            spec.center[1] + spec.radius * std::sin(theta)};
}

std::vector<double> sphere_point(const ManifoldSpec& spec, double polar, double azimuth) {
    const double s = std::sin(polar);
    return {spec.center[0] + spec.radius * s * std::cos(azimuth),
            spec.center[1] + spec.radius * s * std::sin(azimuth),
            spec.center[2] + spec.radius * std::cos(polar)};
}

std::vector<double> torus_point(const ManifoldSpec& spec, double a, double b) {
    const double r = spec.radius;
    return {0.5 + r * std::cos(a), 0.5 + r * std::sin(a),
            0.5 + r * std::cos(b), 0.5 + r * std::sin(b)};
}

void require_on_manifold(const ManifoldSpec& spec, std::span<const double> p) {
    double off = 0.0;
    switch (spec.kind) {
    case ManifoldKind::circle: {
        double d = std::hypot(p[0] - spec.center[0], p[1] - spec.center[1]);
        off = std::abs(d - spec.radius);
        break;
    }
    case ManifoldKind::sphere: {
        double d = std::sqrt(sq(p[0] - spec.center[0]) + sq(p[1] - spec.center[1]) +
                             sq(p[2] - spec.center[2]));
        off = std::abs(d - spec.radius);
        break;
    }
    case ManifoldKind::flat_torus: {
        double d1 = std::hypot(p[0] - 0.5, p[1] - 0.5);
        double d2 = std::hypot(p[2] - 0.5, p[3] - 0.5);
        off = std::max(std::abs(d1 - spec.radius), std::abs(d2 - spec.radius));
        break;
    }
    case ManifoldKind::point_cloud: {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : spec.cloud)
            best = std::min(best, euclidean_distance(p, q));
        off = best;
        break;
    }
    }
    if (off > kOnManifoldTol)
        throw std::invalid_argument("geodesic_distance: point is off the manifold by " +
                                    std::to_string(off));
}

double wrap_angle_gap(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2.0 * kPi);
    return d > kPi ? 2.0 * kPi - d : d;
}

// Greedy farthest-point net over the cloud until max gap <= radius.
Covering cloud_covering(const ManifoldSpec& spec, double radius) {
    if (spec.cloud.empty())
        throw std::invalid_argument("manifold_covering: empty point cloud");
    const std::size_t n = spec.cloud.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> picked;
    std::size_t next = 0; // deterministic start
    for (;;) {
        picked.push_back(next);
        const auto& c = spec.cloud[next];
        double worst = 0.0;
        std::size_t worst_idx = 0;
        for (std::size_t i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], euclidean_distance(spec.cloud[i], c));
            if (dist[i] > worst) {
                worst = dist[i];
                worst_idx = i;
            }
        }
        if (worst <= radius) break;
        next = worst_idx;
    }
    Covering out;
    out.radius = radius;
    out.kind = "point_cloud";
    for (std::size_t idx : picked) out.centers.push_back(spec.cloud[idx]);
    return out;
}

// Dijkstra over the k-NN graph of the cloud.
double cloud_geodesic(const ManifoldSpec& spec, std::size_t src, std::size_t dst) {
    const std::size_t n = spec.cloud.size();
    const std::size_t k = std::min(spec.knn, n - 1);
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    std::vector<std::pair<double, std::size_t>> nbr;
    for (std::size_t i = 0; i < n; ++i) {
        nbr.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            nbr.emplace_back(euclidean_distance(spec.cloud[i], spec.cloud[j]), j);
        }
        std::partial_sort(nbr.begin(), nbr.begin() + std::ptrdiff_t(k), nbr.end());
        for (std::size_t t = 0; t < k; ++t) {
            adj[i].emplace_back(nbr[t].second, nbr[t].first);
            adj[nbr[t].second].emplace_back(i, nbr[t].first); // symmetrize
        }
    }
    std::vector<double> d(n, std::numeric_limits<double>::infinity());
    std::priority_queue<std::pair<double, std::size_t>,
                        std::vector<std::pair<double, std::size_t>>, std::greater<>> pq;
    d[src] = 0.0;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
        auto [dd, u] = pq.top();
        pq.pop();
        if (dd > d[u]) continue;
        if (u == dst) break;
        for (auto [v, w] : adj[u]) {
            if (d[u] + w < d[v]) {
                d[v] = d[u] + w;
                pq.emplace(d[v], v);
            }
        }
    }
    if (!std::isfinite(d[dst]))
        throw std::runtime_error("geodesic_distance: k-NN graph is disconnected");
    return d[dst];
}

std::size_t nearest_cloud_index(const ManifoldSpec& spec, std::span<const double> p) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < spec.cloud.size(); ++i) {
        const double d = euclidean_distance(p, spec.cloud[i]);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

// Volume-of-ball constant in dimension d.
double unit_ball_volume(std::size_t d) {
    return std::pow(kPi, double(d) / 2.0) / std::tgamma(double(d) / 2.0 + 1.0);
}

// k-NN volume estimator: Vol ~ (omega_d / k) * sum_i r_k(i)^d.
double estimate_cloud_volume(const std::vector<std::vector<double>>& cloud, std::size_t d) {
    const std::size_t n = cloud.size();
    const std::size_t k = std::min<std::size_t>(5, n - 1);
    if (k == 0) return 0.0;
    double acc = 0.0;
    std::vector<double> dists;
    for (std::size_t i = 0; i < n; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) dists.push_back(euclidean_distance(cloud[i], cloud[j]));
        std::nth_element(dists.begin(), dists.begin() + std::ptrdiff_t(k - 1), dists.end());
        acc += std::pow(dists[k - 1], double(d));
    }
    return unit_ball_volume(d) / double(k) * acc;
}

// Fibonacci sphere: n well-spread points, deterministic.
std::vector<std::vector<double>> fibonacci_sphere(const ManifoldSpec& spec, std::size_t n) {
    std::vector<std::vector<double>> pts;
    pts.reserve(n);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (double(i) + 0.5) / double(n);
        const double polar = std::acos(std::clamp(z, -1.0, 1.0));
        const double azimuth = golden * double(i);
        pts.push_back(sphere_point(spec, polar, azimuth));
    }
    return pts;
}

} // namespace

std::string to_string(ManifoldKind kind) {
    switch (kind) {
    case ManifoldKind::circle: return "circle";
    case ManifoldKind::sphere: return "sphere";
    case ManifoldKind::flat_torus: return "flat_torus";
    case ManifoldKind::point_cloud: return "point_cloud";
    }
    return "unknown";
}

ManifoldSpec ManifoldSpec::circle(double radius, std::vector<double> center) {
    ManifoldSpec s;
    s.kind = ManifoldKind::circle;
    s.ambient_dim = 2;
    s.intrinsic_dim = 1;
    s.radius = radius;
    s.reach = radius;
    s.volume = 2.0 * kPi * radius;
    s.center = std::move(center);
    s.validate();
    return s;
}

ManifoldSpec ManifoldSpec::sphere(double radius, std::vector<double> center) {
    ManifoldSpec s;
    s.kind = ManifoldKind::sphere;
    s.ambient_dim = 3;
    s.intrinsic_dim = 2;
    s.radius = radius;
    s.reach = radius;
    s.volume = 4.0 * kPi * radius * radius;
    s.center = std::move(center);
    s.validate();
    return s;
}

ManifoldSpec ManifoldSpec::flat_torus(double radius) {
    ManifoldSpec s;
    s.kind = ManifoldKind::flat_torus;
    s.ambient_dim = 4;
    s.intrinsic_dim = 2;
    s.radius = radius;
    s.reach = radius;
    s.volume = sq(2.0 * kPi * radius);
    s.center = {0.5, 0.5, 0.5, 0.5};
    s.validate();
    return s;
}

ManifoldSpec ManifoldSpec::point_cloud(std::vector<std::vector<double>> points,
                                       std::size_t intrinsic_dim, double reach,
                                       std::size_t knn) {
    ManifoldSpec s;
    s.kind = ManifoldKind::point_cloud;
    if (points.empty())
        throw std::invalid_argument("point_cloud: empty cloud");
    s.ambient_dim = points.front().size();
    s.intrinsic_dim = intrinsic_dim;
    s.reach = reach;
    s.radius = 0.0;
    s.knn = knn;
    s.cloud = std::move(points);
    s.volume = estimate_cloud_volume(s.cloud, intrinsic_dim);
    s.validate();
    return s;
}

void ManifoldSpec::validate() const {
    if (reach <= 0.0) throw std::invalid_argument("ManifoldSpec: reach must be positive");
    if (kind != ManifoldKind::point_cloud) {
        if (intrinsic_dim >= ambient_dim)
            throw std::invalid_argument("ManifoldSpec: intrinsic_dim must be < ambient_dim");
        if (center.size() != ambient_dim)
            throw std::invalid_argument("ManifoldSpec: center has wrong dimension");
        if (radius <= 0.0) throw std::invalid_argument("ManifoldSpec: radius must be positive");
    } else {
        for (const auto& p : cloud)
            if (p.size() != ambient_dim)
                throw std::invalid_argument("ManifoldSpec: ragged point cloud");
    }
}

std::size_t domain_dim(const Domain& domain) {
    if (const auto* cube = std::get_if<CubeDomain>(&domain)) return cube->dim;
    return std::get<ManifoldSpec>(domain).ambient_dim;
}

bool domain_is_manifold(const Domain& domain) {
    return std::holds_alternative<ManifoldSpec>(domain);
}

std::string domain_tag(const Domain& domain) {
    if (const auto* cube = std::get_if<CubeDomain>(&domain))
        return "cube" + std::to_string(cube->dim);
    return to_string(std::get<ManifoldSpec>(domain).kind);
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("euclidean_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += sq(x[i] - y[i]);
    return std::sqrt(s);
}

Covering grid_covering(std::size_t dim, double radius) {
    if (dim < 1) throw std::invalid_argument("grid_covering: dim must be >= 1");
    const double limit = std::sqrt(double(dim)) / 2.0;
    if (!(radius > 0.0) || radius > limit)
        throw std::invalid_argument("grid_covering: radius must lie in (0, sqrt(d)/2]");
    const double cell = 2.0 * radius / std::sqrt(double(dim));
    const std::size_t per_axis = std::size_t(std::ceil(1.0 / cell));
    Covering out;
    out.radius = radius;
    out.kind = "cube" + std::to_string(dim);
    std::vector<std::size_t> idx(dim, 0);
    for (;;) {
        std::vector<double> c(dim);
        for (std::size_t k = 0; k < dim; ++k)
            c[k] = (double(idx[k]) + 0.5) / double(per_axis);
        out.centers.push_back(std::move(c));
        std::size_t k = 0;
        while (k < dim && ++idx[k] == per_axis) idx[k++] = 0;
        if (k == dim) break;
    }
    return out;
}

Covering pad_covering(Covering covering) {
    if (covering.count() == 1) covering.centers.push_back(covering.centers.front());
    return covering;
}

Covering manifold_covering(const ManifoldSpec& spec, double radius) {
    if (!(radius > 0.0) || radius > spec.reach / 2.0)
        throw std::invalid_argument(
            "manifold_covering: radius must lie in (0, reach/2]; got " +
            std::to_string(radius) + " with reach " + std::to_string(spec.reach));
    Covering out;
    out.radius = radius;
    out.kind = to_string(spec.kind);
    switch (spec.kind) {
    case ManifoldKind::circle: {
        // n equiangular centers; worst-case chord 2R*sin(pi/(2n)).
        const double u = std::min(1.0, radius / (2.0 * spec.radius));
        const std::size_t n = std::size_t(std::ceil(kPi / (2.0 * std::asin(u))));
        for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i)
            out.centers.push_back(circle_point(spec, 2.0 * kPi * double(i) / double(n)));
        break;
    }
    case ManifoldKind::sphere: {
        // Latitude rings with angular budget split between polar and azimuthal
        // moves, then a margin-guarded redundancy prune.
        const double a = 2.0 * std::asin(std::min(1.0, radius / (2.0 * spec.radius)));
        const std::size_t n_rings = std::size_t(std::ceil(kPi / a));
        for (std::size_t i = 0; i < n_rings; ++i) {
            const double polar = (double(i) + 0.5) * kPi / double(n_rings);
            const std::size_t m = std::max<std::size_t>(
                1, std::size_t(std::ceil(2.0 * kPi * std::sin(polar) / a)));
            for (std::size_t j = 0; j < m; ++j)
                out.centers.push_back(sphere_point(spec, polar, 2.0 * kPi * double(j) / double(m)));
        }
        // Margin-guarded redundancy prune; quadratic in the center count, so
        // only worthwhile for coarse coverings.
        if (out.centers.size() <= 256) {
            const auto probes = fibonacci_sphere(spec, 50000);
            auto covered = [&](const std::vector<std::vector<double>>& centers, double r) {
                for (const auto& p : probes) {
                    double best = std::numeric_limits<double>::infinity();
                    for (const auto& c : centers) best = std::min(best, euclidean_distance(p, c));
                    if (best > r) return false;
                }
                return true;
            };
            for (std::size_t i = out.centers.size(); i-- > 0;) {
                auto trial = out.centers;
                trial.erase(trial.begin() + std::ptrdiff_t(i));
                if (covered(trial, 0.95 * radius)) out.centers = std::move(trial);
            }
        }
        break;
    }
    case ManifoldKind::flat_torus: {
        // Product of two circle coverings, each at radius/sqrt(2).
        const double per = radius / std::sqrt(2.0);
        const double u = std::min(1.0, per / (2.0 * spec.radius));
        const std::size_t n = std::size_t(std::ceil(kPi / (2.0 * std::asin(u))));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out.centers.push_back(torus_point(spec, 2.0 * kPi * double(i) / double(n),
                                                  2.0 * kPi * double(j) / double(n)));
        break;
    }
    case ManifoldKind::point_cloud:
        return cloud_covering(spec, radius);
    }
    return out;
}

double geodesic_distance(const ManifoldSpec& spec, std::span<const double> x,
                         std::span<const double> y) {
    if (x.size() != spec.ambient_dim || y.size() != spec.ambient_dim)
        throw std::invalid_argument("geodesic_distance: dimension mismatch");
    require_on_manifold(spec, x);
    require_on_manifold(spec, y);
    switch (spec.kind) {
    case ManifoldKind::circle:
        return spec.radius * wrap_angle_gap(circle_angle_of(spec, x), circle_angle_of(spec, y));
    case ManifoldKind::sphere: {
        double ux[3], uy[3];
        for (int i = 0; i < 3; ++i) {
            ux[i] = (x[i] - spec.center[i]) / spec.radius;
            uy[i] = (y[i] - spec.center[i]) / spec.radius;
        }
        const double dot = ux[0] * uy[0] + ux[1] * uy[1] + ux[2] * uy[2];
        const double cx = ux[1] * uy[2] - ux[2] * uy[1];
        const double cy = ux[2] * uy[0] - ux[0] * uy[2];
        const double cz = ux[0] * uy[1] - ux[1] * uy[0];
        const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
        return spec.radius * std::atan2(cross, dot);
    }
    case ManifoldKind::flat_torus: {
        const double a1 = std::atan2(x[1] - 0.5, x[0] - 0.5);
        const double b1 = std::atan2(y[1] - 0.5, y[0] - 0.5);
        const double a2 = std::atan2(x[3] - 0.5, x[2] - 0.5);
        const double b2 = std::atan2(y[3] - 0.5, y[2] - 0.5);
        return std::hypot(spec.radius * wrap_angle_gap(a1, b1),
                          spec.radius * wrap_angle_gap(a2, b2));
    }
    case ManifoldKind::point_cloud:
        return cloud_geodesic(spec, nearest_cloud_index(spec, x), nearest_cloud_index(spec, y));
    }
    return 0.0;
}

std::vector<double> sample_domain_point(const Domain& domain, Rng& rng) {
    if (const auto* cube = std::get_if<CubeDomain>(&domain)) {
        std::vector<double> p(cube->dim);
        for (auto& v : p) v = rng.uniform01();
        return p;
    }
    const auto& spec = std::get<ManifoldSpec>(domain);
    switch (spec.kind) {
    case ManifoldKind::circle:
        return circle_point(spec, rng.uniform(0.0, 2.0 * kPi));
    case ManifoldKind::sphere: {
        const double z = rng.uniform(-1.0, 1.0); // area-uniform
        return sphere_point(spec, std::acos(z), rng.uniform(0.0, 2.0 * kPi));
    }
    case ManifoldKind::flat_torus:
        return torus_point(spec, rng.uniform(0.0, 2.0 * kPi), rng.uniform(0.0, 2.0 * kPi));
    case ManifoldKind::point_cloud:
        return spec.cloud[rng.index(spec.cloud.size())];
    }
    return {};
}

std::vector<std::vector<double>> scan_points(const Domain& domain, std::size_t n,
                                             std::uint64_t seed) {
    std::vector<std::vector<double>> pts;
    if (const auto* cube = std::get_if<CubeDomain>(&domain)) {
        const std::size_t d = cube->dim;
        if (d <= 2) {
            const std::size_t per_axis =
                std::max<std::size_t>(2, std::size_t(std::ceil(std::pow(double(n), 1.0 / double(d)))));
            std::vector<std::size_t> idx(d, 0);
            for (;;) {
                std::vector<double> p(d);
                for (std::size_t k = 0; k < d; ++k)
                    p[k] = double(idx[k]) / double(per_axis - 1);
                pts.push_back(std::move(p));
                std::size_t k = 0;
                while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
                if (k == d) break;
            }
        } else {
            Sobol sobol(d, seed);
            pts.reserve(n);
            for (std::size_t i = 0; i < n; ++i) pts.push_back(sobol.next());
        }
        return pts;
    }
    const auto& spec = std::get<ManifoldSpec>(domain);
    pts.reserve(n);
    switch (spec.kind) {
    case ManifoldKind::circle:
        for (std::size_t i = 0; i < n; ++i)
            pts.push_back(circle_point(spec, 2.0 * kPi * double(i) / double(n)));
        break;
    case ManifoldKind::sphere:
        pts = fibonacci_sphere(spec, n);
        break;
    case ManifoldKind::flat_torus: {
        Sobol sobol(2, seed);
        for (std::size_t i = 0; i < n; ++i) {
            const auto u = sobol.next();
            pts.push_back(torus_point(spec, 2.0 * kPi * u[0], 2.0 * kPi * u[1]));
        }
        break;
    }
    case ManifoldKind::point_cloud:
        pts = spec.cloud;
        break;
    }
    return pts;
}

CoverReport verify_covering(const Covering& covering, const Domain& domain,
                            std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("verify_covering: n_samples must be >= 1");
    const auto samples = scan_points(domain, n_samples, seed);
    std::vector<double> gaps(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : covering.centers)
            best = std::min(best, euclidean_distance(samples[i], c));
        gaps[i] = best;
    });
    CoverReport report;
    report.samples = samples.size();
    report.max_gap = covering.centers.empty()
                         ? std::numeric_limits<double>::infinity()
                         : *std::max_element(gaps.begin(), gaps.end());
    // Grid constructions meet the radius with equality at cell corners, where
    // the scanned distance can round one ulp above it.
    report.ok = report.max_gap <= covering.radius * (1.0 + 1e-12);
    return report;
}

MetricReport check_metric_equivalence(const ManifoldSpec& spec, std::size_t n_pairs,
                                      std::uint64_t seed) {
    if (spec.kind == ManifoldKind::point_cloud)
        throw std::invalid_argument("check_metric_equivalence: built-in manifolds only");
    MetricReport report;
    report.pairs = n_pairs;
    Rng rng(seed);
    const Domain domain = spec;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        // Rejection-sample admissible pairs (chord <= reach/2).
        std::vector<double> x, y;
        for (;;) {
            x = sample_domain_point(domain, rng);
            y = sample_domain_point(domain, rng);
            const double chord = euclidean_distance(x, y);
            if (chord > 0.0 && chord <= spec.reach / 2.0) break;
        }
        const double chord = euclidean_distance(x, y);
        const double geo = geodesic_distance(spec, x, y);
        report.worst_ratio = std::max(report.worst_ratio, geo / (2.0 * chord));
        if (geo > 2.0 * chord + 1e-9) ++report.violations;
    }
    report.ok = report.violations == 0;
    return report;
}

} // namespace softpou
