#include "softpou/pou.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parallel.hpp"
#include "rng.hpp"

namespace softpou {

namespace {

double manifold_count_constant(const ManifoldSpec& spec) {
    const double d = double(spec.intrinsic_dim);
    return std::pow(3.0, d) * spec.volume * std::pow(d, d / 2.0);
}

} // namespace

std::size_t HolderTarget::covering_exponent_dim() const {
    if (const auto* spec = std::get_if<ManifoldSpec>(&domain)) return spec->intrinsic_dim;
    return std::get<CubeDomain>(domain).dim;
}

void HolderTarget::validate() const {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("HolderTarget: alpha must lie in (0, 1]");
    if (holder_const < 0.0)
        throw std::invalid_argument("HolderTarget: holder_const must be >= 0");
    if (!(sup_bound > 0.0))
        throw std::invalid_argument("HolderTarget: sup_bound must be positive");
    if (!eval) throw std::invalid_argument("HolderTarget: missing evaluator");
}

bool holder_spot_check(const HolderTarget& target, std::size_t n_pairs, std::uint64_t seed) {
    target.validate();
    Rng rng(seed);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const auto x = sample_domain_point(target.domain, rng);
        const auto y = sample_domain_point(target.domain, rng);
        double dist;
        if (const auto* spec = std::get_if<ManifoldSpec>(&target.domain))
            dist = geodesic_distance(*spec, x, y);
        else
            dist = euclidean_distance(x, y);
        const double gap = std::abs(target.eval(x) - target.eval(y));
        if (gap > target.holder_const * std::pow(dist, target.alpha) + 1e-9) return false;
        if (std::abs(target.eval(x)) > target.sup_bound + 1e-9) return false;
    }
    return true;
}

void require_pou_admissible(const PouConfig& cfg, const HolderTarget& target) {
    const double e_inv = std::exp(-1.0);
    if (!(cfg.epsilon > 0.0) || cfg.epsilon > e_inv)
        throw std::domain_error("pou admissibility: accuracy must lie in (0, 1/e]; got " +
                                std::to_string(cfg.epsilon));
    if (const auto* spec = std::get_if<ManifoldSpec>(&target.domain)) {
        const double cap =
            8.0 * target.holder_const * std::pow(spec->reach / 4.0, target.alpha);
        if (cfg.epsilon > cap)
            throw std::domain_error(
                "pou admissibility (manifold): accuracy must be <= 8*C_H*(reach/4)^alpha = " +
                std::to_string(cap));
    }
}

double pou_radius(double epsilon, const HolderTarget& target) {
    const double denom = domain_is_manifold(target.domain) ? 8.0 : 4.0;
    return std::pow(epsilon / (denom * target.holder_const), 1.0 / target.alpha);
}

double pou_count_bound(double epsilon, const HolderTarget& target) {
    const double a = target.alpha;
    const double d = double(target.covering_exponent_dim());
    if (const auto* spec = std::get_if<ManifoldSpec>(&target.domain))
        return manifold_count_constant(*spec) * std::pow(8.0 * target.holder_const, d / a) *
               std::pow(epsilon, -d / a);
    return std::pow(std::sqrt(d) * std::pow(4.0 * target.holder_const, 1.0 / a), d) *
           std::pow(epsilon, -d / a);
}

namespace {

double theoretical_scale(double epsilon, const HolderTarget& target) {
    const double a = target.alpha;
    const double d = double(target.covering_exponent_dim());
    const double ch = target.holder_const;
    const double b = target.sup_bound;
    double lead, logterm;
    if (const auto* spec = std::get_if<ManifoldSpec>(&target.domain)) {
        lead = std::pow(8.0 * ch, 2.0 / a) / 3.0;
        logterm = std::log(4.0 * b * manifold_count_constant(*spec) * std::pow(8.0 * ch, d / a));
    } else {
        lead = std::pow(4.0 * ch, 2.0 / a) / 3.0;
        logterm = std::log(4.0 * b * std::pow(std::sqrt(d) * std::pow(4.0 * ch, 1.0 / a), d));
    }
    // A negative log factor means the tail constraint is vacuous (degenerate
    // certificates); flooring at zero keeps the scale positive and valid.
    return lead * (std::max(0.0, logterm) + (d + a) / a) * std::pow(epsilon, -2.0 / a) *
           std::log(1.0 / epsilon);
}

PouApproximator with_scale(const PouApproximator& base, double scale) {
    PouApproximator out = base;
    out.scale = scale;
    return out;
}

double scanned_error(const PouApproximator& approx, const HolderTarget& target) {
    Sampler s;
    s.n = 2000;
    return sup_error([&](std::span<const double> x) { return pou_eval(approx, x); }, target, s)
        .value;
}

} // namespace

double scaling_parameter(const PouConfig& cfg, const HolderTarget& target) {
    require_pou_admissible(cfg, target);
    const double theo = theoretical_scale(cfg.epsilon, target);
    if (cfg.mode == PouMode::theoretical) return theo;

    // Calibrated: smallest scale (doubling then bisection on the scanned sup
    // error) still achieving error <= eps, capped by the theoretical value.
    const double radius = pou_radius(cfg.epsilon, target);
    Covering covering;
    if (const auto* spec = std::get_if<ManifoldSpec>(&target.domain))
        covering = manifold_covering(*spec, radius);
    else
        covering = grid_covering(std::get<CubeDomain>(target.domain).dim, radius);
    covering = pad_covering(std::move(covering));
    PouApproximator base;
    base.covering = covering;
    base.scale = 1.0;
    base.values.reserve(covering.count());
    for (const auto& c : covering.centers) base.values.push_back(target.eval(c));

    double hi = 1.0;
    while (hi < theo && scanned_error(with_scale(base, hi), target) > cfg.epsilon) hi *= 2.0;
    hi = std::min(hi, theo);
    if (scanned_error(with_scale(base, hi), target) > cfg.epsilon) return theo;
    double lo = hi / 2.0;
    for (int iter = 0; iter < 40 && hi - lo > 1e-6 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (scanned_error(with_scale(base, mid), target) <= cfg.epsilon)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

void PouApproximator::validate() const {
    if (values.size() != covering.count())
        throw std::invalid_argument("PouApproximator: values/centers length mismatch");
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("PouApproximator: scale must be positive and finite");
}

std::pair<Vector, Vector> pou_weights_both(const PouApproximator& approx,
                                           std::span<const double> x) {
    approx.validate();
    const std::size_t n = approx.covering.count();
    const double mg = approx.scale;
    const double rg = approx.covering.radius;
    Vector dist_logits(n), dot_logits(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = approx.covering.centers[i];
        double d2 = 0.0, dot = 0.0, c2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double gap = x[k] - c[k];
            d2 += gap * gap;
            dot += x[k] * c[k];
            c2 += c[k] * c[k];
        }
        dist_logits[i] = mg * (rg * rg - d2);
        dot_logits[i] = 2.0 * mg * dot - mg * c2;
    }
    return {stable_softmax(dist_logits), stable_softmax(dot_logits)};
}

Vector pou_weights(const PouApproximator& approx, std::span<const double> x) {
    approx.validate();
    if (x.size() != approx.dim())
        throw std::invalid_argument("pou_weights: point dimension mismatch");
    for (double v : x)
        if (v < -1e-9 || v > 1.0 + 1e-9)
            throw std::invalid_argument("pou_weights: point lies outside the unit cube");
    const std::size_t n = approx.covering.count();
    const double mg = approx.scale;
    Vector logits(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = approx.covering.centers[i];
        double dot = 0.0, c2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            dot += x[k] * c[k];
            c2 += c[k] * c[k];
        }
        logits[i] = 2.0 * mg * dot - mg * c2;
    }
    return stable_softmax(logits);
}

double pou_eval(const PouApproximator& approx, std::span<const double> x) {
    const Vector w = pou_weights(approx, x);
    double out = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) out += w[i] * approx.values[i];
    return out;
}

PouApproximator build_pou(const HolderTarget& target, const PouConfig& cfg) {
    target.validate();
    require_pou_admissible(cfg, target);
    const double radius = pou_radius(cfg.epsilon, target);
    Covering covering;
    if (const auto* spec = std::get_if<ManifoldSpec>(&target.domain))
        covering = manifold_covering(*spec, radius);
    else
        covering = grid_covering(std::get<CubeDomain>(target.domain).dim, radius);
    covering = pad_covering(std::move(covering));

    PouApproximator approx;
    approx.covering = std::move(covering);
    approx.values.reserve(approx.covering.count());
    for (const auto& c : approx.covering.centers) approx.values.push_back(target.eval(c));
    check_finite(approx.values, "build_pou values");
    approx.scale = scaling_parameter(cfg, target);
    return approx;
}

SupErrorReport sup_error(const std::function<double(std::span<const double>)>& evaluator,
                         const HolderTarget& target, const Sampler& sampler) {
    if (sampler.n < 100)
        throw std::invalid_argument("sup_error: sampler resolution must be >= 100 points");
    std::vector<std::vector<double>> pts;
    const bool cube = !domain_is_manifold(target.domain);
    const std::size_t d = target.input_dim();
    if (sampler.kind == Sampler::Kind::sobol && cube) {
        Sobol sobol(d, sampler.seed);
        pts.reserve(sampler.n);
        for (std::size_t i = 0; i < sampler.n; ++i) pts.push_back(sobol.next());
    } else {
        pts = scan_points(target.domain, sampler.n, sampler.seed);
    }
    std::vector<double> errs(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        errs[i] = std::abs(evaluator(pts[i]) - target.eval(pts[i]));
    });
    SupErrorReport report;
    report.samples = pts.size();
    report.value = *std::max_element(errs.begin(), errs.end());
    return report;
}

} // namespace softpou
