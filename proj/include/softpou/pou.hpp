#ifndef SOFTPOU_POU_HPP
#define SOFTPOU_POU_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "softpou/domain.hpp"
#include "softpou/numeric.hpp"

namespace softpou {

// A target function together with its caller-supplied smoothness certificate.
// The certificate is spot-checked (holder_spot_check), never inferred.
struct HolderTarget {
    std::function<double(std::span<const double>)> eval;
    double alpha = 1.0;        // Hoelder exponent, in (0,1]
    double holder_const = 1.0; // C_H
    double sup_bound = 1.0;    // B >= sup |g|
    Domain domain;
    std::string name;

    std::size_t input_dim() const { return domain_dim(domain); }
    std::size_t covering_exponent_dim() const; // intrinsic dim on manifolds
    void validate() const;
};

// Checks |g(x)-g(y)| <= C_H * dist(x,y)^alpha + 1e-9 on random pairs
// (Euclidean distance on cubes, geodesic on manifolds).
bool holder_spot_check(const HolderTarget& target, std::size_t n_pairs, std::uint64_t seed);

enum class PouMode { theoretical, calibrated };

struct PouConfig {
    double epsilon = 0.2;
    PouMode mode = PouMode::theoretical;
};

// Admissibility of the target accuracy for the softmax-POU scheme:
// eps in (0, 1/e] on cubes, additionally eps <= 8*C_H*(reach/4)^alpha on
// manifolds. Throws std::domain_error when violated.
void require_pou_admissible(const PouConfig& cfg, const HolderTarget& target);

// Covering radius of the scheme: (eps/(4 C_H))^(1/alpha) on cubes,
// (eps/(8 C_H))^(1/alpha) on manifolds.
double pou_radius(double epsilon, const HolderTarget& target);

// Closed-form bound on the number of centers the scheme may use.
double pou_count_bound(double epsilon, const HolderTarget& target);

// Softmax inverse-temperature M_g. Theoretical mode evaluates the closed
// form; calibrated mode searches (doubling + bisection against the scanned
// sup error) for the smallest scale still achieving error <= eps, capped by
// the theoretical value.
double scaling_parameter(const PouConfig& cfg, const HolderTarget& target);

struct PouApproximator {
    Covering covering;
    std::vector<double> values; // g(c_i)
    double scale = 1.0;         // M_g
    std::size_t dim() const { return covering.centers.empty() ? 0 : covering.centers.front().size(); }
    void validate() const;
};

// Weights through the attention-compatible dot-product logits
// 2 M_g <x,c_i> - M_g |c_i|^2 (production path).
Vector pou_weights(const PouApproximator& approx, std::span<const double> x);

// Both algebraic routes: .first from the distance logits
// M_g (r_g^2 - |x-c_i|^2), .second from the dot-product logits. They agree up
// to floating-point noise; verify paths assert it.
std::pair<Vector, Vector> pou_weights_both(const PouApproximator& approx,
                                           std::span<const double> x);

double pou_eval(const PouApproximator& approx, std::span<const double> x);

PouApproximator build_pou(const HolderTarget& target, const PouConfig& cfg);

struct Sampler {
    enum class Kind { automatic, grid, sobol };
    Kind kind = Kind::automatic;
    std::size_t n = 10000;
    std::uint64_t seed = 0;
};

struct SupErrorReport {
    double value = 0.0;
    std::size_t samples = 0;
};

// Scanned maximum of |evaluator(x) - g(x)| over the target's domain. A
// sampled maximum, reported with its sample count; never the exact supremum.
SupErrorReport sup_error(const std::function<double(std::span<const double>)>& evaluator,
                         const HolderTarget& target, const Sampler& sampler);

} // namespace softpou

#endif
