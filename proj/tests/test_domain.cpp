#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rng.hpp"
#include "softpou/domain.hpp"
#include "softpou/io.hpp"

using namespace softpou;

namespace {
constexpr double kPi = std::numbers::pi;

// Least-squares slope, independent of the library's fitter.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(x.size());
    my /= double(x.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}
} // namespace

TEST_CASE("grid covering: single cell cases") {
    const Covering one = grid_covering(1, 0.5);
    REQUIRE(one.count() == 1);
    CHECK(one.centers[0][0] == 0.5);

    const Covering square = grid_covering(2, std::sqrt(2.0) / 2.0);
    REQUIRE(square.count() == 1);
    CHECK(square.centers[0][0] == 0.5);
    CHECK(square.centers[0][1] == 0.5);
    // Circumradius of the unit square around its center is exactly sqrt(2)/2.
    const double circum = std::hypot(0.5, 0.5);
    CHECK(circum == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("grid covering: d=1, r=0.3 gives the two clamped cells") {
    const Covering c = grid_covering(1, 0.3);
    REQUIRE(c.count() == 2);
    CHECK(c.centers[0][0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(c.centers[1][0] == doctest::Approx(0.75).epsilon(1e-15));
    // Dense scan: every point of [0,1] within 0.3 (actually 0.25) of a center.
    const CoverReport rep = verify_covering(c, CubeDomain{1}, 10000, 3);
    CHECK(rep.ok);
    CHECK(rep.max_gap <= 0.25 + 1e-12);
}

TEST_CASE("grid covering count equals the ceiling formula exactly") {
    Rng rng(99);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t d = 1 + rng.index(3);
        const double limit = std::sqrt(double(d)) / 2.0;
        const double r = rng.uniform(0.05, limit);
        const Covering c = grid_covering(d, r);
        const double per_axis = std::ceil(std::sqrt(double(d)) / (2.0 * r));
        CHECK(double(c.count()) == std::pow(per_axis, double(d)));
    }
}

TEST_CASE("grid covering rejects bad radii") {
    CHECK_THROWS_AS(grid_covering(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(grid_covering(1, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(grid_covering(2, 1.0), std::invalid_argument); // > sqrt(2)/2
    CHECK_THROWS_AS(grid_covering(0, 0.1), std::invalid_argument);
}

TEST_CASE("every grid covering passes its own scan certificate") {
    for (double r : {0.5, 0.3, 0.21, 0.11}) {
        const Covering c = grid_covering(1, r);
        CHECK(verify_covering(c, CubeDomain{1}, 10000, 1).ok);
    }
    const Covering c2 = grid_covering(2, 0.2);
    CHECK(verify_covering(c2, CubeDomain{2}, 10000, 1).ok);
}

TEST_CASE("verify_covering flags a damaged covering") {
    Covering c = grid_covering(1, 0.11);
    REQUIRE(c.count() >= 3);
    c.centers.erase(c.centers.begin(), c.centers.begin() + 2);
    CHECK_FALSE(verify_covering(c, CubeDomain{1}, 10000, 5).ok);
}

TEST_CASE("three hand-placed equiangular centers cover the circle at r=0.5") {
    const auto spec = ManifoldSpec::circle();
    Covering c;
    c.kind = "circle";
    c.radius = 0.5; // max chord to the nearest of 3 centers is 2 R sin(pi/6) = R
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * kPi * k / 3.0;
        c.centers.push_back({0.5 + 0.5 * std::cos(a), 0.5 + 0.5 * std::sin(a)});
    }
    const CoverReport rep = verify_covering(c, spec, 10000, 7);
    CHECK(rep.ok);
    CHECK(rep.max_gap == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("circle covering count follows the chord formula") {
    const auto spec = ManifoldSpec::circle();
    const double r = 0.2; // <= reach/2 = 0.25
    const Covering c = manifold_covering(spec, r);
    const std::size_t expected = std::size_t(std::ceil(kPi / (2.0 * std::asin(r))));
    CHECK(c.count() == expected);
    CHECK(verify_covering(c, spec, 10000, 11).ok);
}

TEST_CASE("manifold covering rejects radii beyond reach/2 and empty clouds") {
    const auto spec = ManifoldSpec::circle();
    CHECK_THROWS_AS(manifold_covering(spec, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(manifold_covering(spec, 0.0), std::invalid_argument);
    std::vector<std::vector<double>> empty;
    CHECK_THROWS_AS(ManifoldSpec::point_cloud(empty, 1, 0.5), std::invalid_argument);
}

TEST_CASE("sphere covering covers both hemispheres") {
    const auto spec = ManifoldSpec::sphere();
    const Covering c = manifold_covering(spec, 0.22);
    const CoverReport rep = verify_covering(c, spec, 10000, 13);
    CHECK(rep.ok);
    bool upper = false, lower = false;
    for (const auto& p : c.centers) {
        if (p[2] > 0.5) upper = true;
        if (p[2] < 0.5) lower = true;
    }
    CHECK(upper);
    CHECK(lower);
}

TEST_CASE("flat torus covering passes its scan certificate") {
    const auto spec = ManifoldSpec::flat_torus();
    const Covering c = manifold_covering(spec, 0.24);
    CHECK(verify_covering(c, spec, 10000, 17).ok);
}

TEST_CASE("halving the radius on the circle scales the count with intrinsic dim 1") {
    const auto spec = ManifoldSpec::circle();
    std::vector<double> lx, ly;
    for (double r : {0.2, 0.14, 0.1, 0.07, 0.05, 0.035}) {
        const Covering c = manifold_covering(spec, r);
        lx.push_back(std::log(1.0 / r));
        ly.push_back(std::log(double(c.count())));
    }
    const double slope = fit_slope(lx, ly);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("geodesic distances: closed forms") {
    const auto circle = ManifoldSpec::circle(1.0, {0.0, 0.0}); // unit circle for metric checks
    const std::vector<double> a = {1.0, 0.0};
    const std::vector<double> b = {0.0, 1.0};
    CHECK(geodesic_distance(circle, a, a) == 0.0);
    CHECK(geodesic_distance(circle, a, b) == doctest::Approx(kPi / 2.0).epsilon(1e-12));

    const auto sphere = ManifoldSpec::sphere(1.0, {0.0, 0.0, 0.0});
    const std::vector<double> pole = {0.0, 0.0, 1.0};
    const std::vector<double> equator = {1.0, 0.0, 0.0};
    CHECK(geodesic_distance(sphere, pole, equator) == doctest::Approx(kPi / 2.0).epsilon(1e-12));

    const auto torus = ManifoldSpec::flat_torus();
    const std::vector<double> t1 = {1.0, 0.5, 1.0, 0.5};
    const std::vector<double> t2 = {0.5, 1.0, 1.0, 0.5}; // quarter turn in the first factor
    CHECK(geodesic_distance(torus, t1, t2) == doctest::Approx(0.5 * kPi / 2.0).epsilon(1e-12));
}

TEST_CASE("geodesic rejects points off the manifold") {
    const auto circle = ManifoldSpec::circle();
    const std::vector<double> inside = {0.5, 0.5};
    const std::vector<double> on = {1.0, 0.5};
    CHECK_THROWS_AS(geodesic_distance(circle, inside, on), std::invalid_argument);
}

TEST_CASE("triangle inequality on random built-in triples") {
    for (const auto& spec :
         {ManifoldSpec::circle(), ManifoldSpec::sphere(), ManifoldSpec::flat_torus()}) {
        Rng rng(23);
        const Domain domain = spec;
        for (int rep = 0; rep < 200; ++rep) {
            const auto x = sample_domain_point(domain, rng);
            const auto y = sample_domain_point(domain, rng);
            const auto z = sample_domain_point(domain, rng);
            const double xy = geodesic_distance(spec, x, y);
            const double yz = geodesic_distance(spec, y, z);
            const double xz = geodesic_distance(spec, x, z);
            CHECK(xz <= xy + yz + 1e-9);
        }
    }
}

TEST_CASE("built-in samples stay inside the unit cube") {
    for (const auto& spec :
         {ManifoldSpec::circle(), ManifoldSpec::sphere(), ManifoldSpec::flat_torus()}) {
        Rng rng(31);
        const Domain domain = spec;
        for (int rep = 0; rep < 500; ++rep) {
            for (double v : sample_domain_point(domain, rng)) {
                CHECK(v >= -1e-12);
                CHECK(v <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("metric equivalence: closed-form circle checks") {
    // Tiny separation: geodesic/chord ratio tends to 1.
    const auto circle = ManifoldSpec::circle(1.0, {0.0, 0.0});
    const double s = 1e-4;
    const std::vector<double> a = {1.0, 0.0};
    const std::vector<double> b = {std::cos(s), std::sin(s)};
    const double chord = euclidean_distance(a, b);
    const double geo = geodesic_distance(circle, a, b);
    CHECK(geo / chord == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(geo <= 2.0 * chord + 1e-9);

    // Chord exactly 1/2 on the unit circle: geodesic = 2 asin(1/4).
    const double theta = 2.0 * std::asin(0.25);
    const std::vector<double> c = {std::cos(theta), std::sin(theta)};
    const double geo2 = geodesic_distance(circle, a, c);
    CHECK(geo2 == doctest::Approx(2.0 * std::asin(0.25)).epsilon(1e-12));
    CHECK(geo2 == doctest::Approx(0.50536).epsilon(1e-4));
    CHECK(geo2 <= 2.0 * euclidean_distance(a, c) + 1e-9);
}

TEST_CASE("metric equivalence holds on 1000 admissible pairs per manifold") {
    for (const auto& spec :
         {ManifoldSpec::circle(), ManifoldSpec::sphere(), ManifoldSpec::flat_torus()}) {
        const MetricReport rep = check_metric_equivalence(spec, 1000, 37);
        CHECK(rep.ok);
        CHECK(rep.violations == 0);
        CHECK(rep.worst_ratio <= 1.0);
    }
}

TEST_CASE("point cloud: greedy net covers and geodesics track the circle") {
    // Cloud sampled densely from the built-in circle.
    const auto circle = ManifoldSpec::circle();
    std::vector<std::vector<double>> cloud;
    for (int i = 0; i < 400; ++i) {
        const double a = 2.0 * kPi * i / 400.0;
        cloud.push_back({0.5 + 0.5 * std::cos(a), 0.5 + 0.5 * std::sin(a)});
    }
    const auto spec = ManifoldSpec::point_cloud(cloud, 1, 0.5, 6);
    CHECK(spec.volume == doctest::Approx(kPi).epsilon(0.35)); // rough estimator

    const Covering net = manifold_covering(spec, 0.1);
    CHECK(verify_covering(net, spec, 400, 1).ok);

    // Graph geodesic approximates the arc between two cloud points.
    const auto& x = cloud[0];
    const auto& y = cloud[100]; // quarter of the circle
    const double graph = geodesic_distance(spec, x, y);
    const double arc = geodesic_distance(circle, x, y);
    CHECK(graph == doctest::Approx(arc).epsilon(0.02));
}

TEST_CASE("covering serializes as {kind, radius, count, centers}") {
    const Covering c = grid_covering(2, 0.3);
    const json j = covering_to_json(c);
    CHECK(j.at("kind") == "cube2");
    CHECK(j.at("radius") == 0.3);
    CHECK(j.at("count") == c.count());
    const Covering back = covering_from_json(j);
    CHECK(back.centers == c.centers);
    CHECK(back.radius == c.radius);
}
