#ifndef SOFTPOU_ANALYSIS_HPP
#define SOFTPOU_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softpou/construction.hpp"
#include "softpou/pou.hpp"
#include "softpou/transformer.hpp"

namespace softpou {

// ---------------------------------------------------------------------------
// Closed-form identity and inequality checks
// ---------------------------------------------------------------------------

// ||softmax(a) - softmax(b)||_1 <= 2 ||a - b||_inf, with 1e-12 slack.
bool check_softmax_lipschitz(std::span<const double> a, std::span<const double> b);

// |sum_k e^{M cos t_k} sin t_k| relative to sum_k e^{M cos t_k}, summed in
// conjugate-pair order so the cancellation survives at M ~ 700.
double sine_sum_residual(double attn_scale, std::size_t seq_len);
bool check_sine_sum(double attn_scale, std::size_t seq_len); // residual <= 1e-10

// Post-restoration canonical form: indicator row is exactly 0/1 and the
// positional rows carry unit-scale sin/cos, all within 1e-12. The trace must
// come from a constructed network.
bool check_restoration(const ActivationTrace& trace, std::size_t seq_len);

// log N(eta) <= N_total * log(1224256 P^4 D^22 M_max^26 / eta), in log space.
double covering_number_bound(double n_total, double seq_len, double embed_dim,
                             double max_mag, double eta);

// Feature-level error bounds at one traced input: the affine features and the
// expert features stay within their leak-driven envelopes.
struct AffineFeatureReport {
    double max_t_error = 0.0, t_bound = 0.0;
    double max_r_error = 0.0, r_bound = 0.0;
    double max_ratio = 0.0; // observed error / bound, must be <= 1
    bool pass = false;
};
AffineFeatureReport check_affine_features(const ActivationTrace& trace,
                                          const ConstructionMeta& meta,
                                          const PouApproximator& pou,
                                          std::span<const double> x);

// ---------------------------------------------------------------------------
// Probes and sweeps
// ---------------------------------------------------------------------------

struct LipschitzProbeReport {
    std::size_t trials = 0;
    double delta = 0.0;
    double max_change = 0.0;   // scan max over a fixed input set, not a sup
    double bound_log = 0.0;    // log of 612128 P^4 D^22 M_max^25 * delta
    double bound = 0.0;        // exp(bound_log), +inf if it overflows
    bool pass = false;
};

// Perturbs every parameter by uniform(-delta, delta) (clamped to the measured
// magnitude), measures the worst output change over a fixed 256-point scan,
// and compares against the parameter-Lipschitz bound. Directions depend only
// on (seed, trial), so sweeps over delta reuse them.
LipschitzProbeReport param_lipschitz_probe(const TransformerParams& params,
                                           const Domain& domain, double delta,
                                           std::size_t trials, std::uint64_t seed);

struct RatePoint {
    double x = 0.0;         // epsilon or n
    double count = 0.0;     // centers C_g
    double sup_error = 0.0; // scanned
    double n_total = 0.0;   // structural parameter count
    double mse = 0.0;       // generalization proxy only
};

struct RateReport {
    std::vector<RatePoint> points;
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    double expected_slope = 0.0, tolerance = 0.0;
    bool pass = false;
    std::string x_name, y_name;
};

// Builds the estimator per accuracy, fits log(count) against log(1/eps);
// expected slope d/alpha (intrinsic d on manifolds).
RateReport rate_sweep(const HolderTarget& target, std::span<const double> eps_list,
                      PouMode mode, double tolerance = 0.15);

// Plug-in local-average surrogate for the regression experiment (labelled
// proxy throughout: values are truncated ball means, not a trained network).
// Fits log MSE against log n; expected slope -2 alpha / (2 alpha + d).
RateReport generalization_proxy(const HolderTarget& target, double noise_sd,
                                std::span<const std::size_t> n_list, std::uint64_t seed,
                                double tolerance = 0.25);

// ---------------------------------------------------------------------------
// Aggregated verification
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double limit = 0.0; // tolerance or bound the measurement is held against
    bool pass = false;
};

struct VerifyOptions {
    std::size_t probe_points = 5;    // traced inputs for the identity checks
    std::size_t scan_points = 2000;  // error-scan resolution
    std::uint64_t seed = 0;
    bool with_sup_error = true;      // needs a target
};

// Runs the full identity/bound suite on an assembled network. The target may
// be null when verifying reloaded parameter files; error-scan checks are then
// skipped.
std::vector<CheckResult> verify_construction(const Construction& built,
                                             const HolderTarget* target,
                                             const VerifyOptions& options);

bool all_pass(const std::vector<CheckResult>& results);

} // namespace softpou

#endif
