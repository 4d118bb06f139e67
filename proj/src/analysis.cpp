#include "softpou/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "parallel.hpp"
#include "rng.hpp"

namespace softpou {

namespace {

constexpr double kPi = std::numbers::pi;

double token_angle(std::size_t token, std::size_t seq_len) {
    return 2.0 * kPi * double(token + 1) / double(seq_len);
}

void visit_params(TransformerParams& params, const std::function<void(double&)>& fn) {
    auto scan_m = [&fn](Matrix& m) {
        for (std::size_t i = 0; i < m.size(); ++i) fn(m.data()[i]);
    };
    auto scan_v = [&fn](Vector& v) {
        for (double& x : v) fn(x);
    };
    scan_m(params.embed_w);
    scan_v(params.embed_b);
    scan_m(params.positional);
    for (EncoderBlock& b : params.blocks) {
        for (AttentionHead& h : b.heads) {
            scan_m(h.query);
            scan_m(h.key);
            scan_m(h.value);
        }
        scan_m(b.out_proj);
        scan_m(b.ffn.w1);
        scan_v(b.ffn.b1);
        scan_m(b.ffn.w2);
        scan_v(b.ffn.b2);
    }
    scan_v(params.readout);
}

struct Fit {
    double slope = 0.0, intercept = 0.0, r2 = 1.0;
};

Fit least_squares(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    Fit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

} // namespace

bool check_softmax_lipschitz(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("check_softmax_lipschitz: length mismatch");
    const Vector sa = stable_softmax(a);
    const Vector sb = stable_softmax(b);
    double l1 = 0.0, linf = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        l1 += std::abs(sa[i] - sb[i]);
        linf = std::max(linf, std::abs(a[i] - b[i]));
    }
    return l1 <= 2.0 * linf + 1e-12;
}

double sine_sum_residual(double attn_scale, std::size_t seq_len) {
    if (seq_len < 2) throw std::invalid_argument("sine_sum_residual: seq_len must be >= 2");
    if (attn_scale < 0.0) throw std::invalid_argument("sine_sum_residual: scale must be >= 0");
    // Factor out the peak exponent so M ~ 700 cannot overflow, then add the
    // conjugate pairs (t_k, t_{P-k}) together before accumulating.
    const std::size_t p = seq_len;
    double denom = 0.0;
    double num = 0.0;
    auto term = [&](std::size_t i) {
        const double a = token_angle(i, p);
        const double w = std::exp(attn_scale * (std::cos(a) - 1.0));
        denom += w;
        return w * std::sin(a);
    };
    for (std::size_t i = 0; 2 * (i + 1) < p; ++i)
        num += term(i) + term(p - 2 - i); // angles t and 2 pi - t
    if (p % 2 == 0) num += term(p / 2 - 1); // t = pi
    num += term(p - 1);                     // t = 2 pi
    return std::abs(num) / denom;
}

bool check_sine_sum(double attn_scale, std::size_t seq_len) {
    return sine_sum_residual(attn_scale, seq_len) <= 1e-10;
}

bool check_restoration(const ActivationTrace& trace, std::size_t seq_len) {
    if (trace.blocks.empty()) throw std::invalid_argument("check_restoration: empty trace");
    const Matrix& z1 = trace.blocks.front().ffn_out;
    if (z1.cols() != seq_len || z1.rows() < 5)
        throw std::invalid_argument("check_restoration: trace is not from a constructed network");
    const std::size_t d = z1.rows() - 4;
    for (std::size_t j = 0; j < seq_len; ++j) {
        const double indicator = j == 0 ? 1.0 : 0.0;
        if (std::abs(z1(d + 1, j) - indicator) > 1e-12) return false;
        const double a = token_angle(j, seq_len);
        if (std::abs(z1(d + 2, j) - std::sin(a)) > 1e-12) return false;
        if (std::abs(z1(d + 3, j) - std::cos(a)) > 1e-12) return false;
    }
    return true;
}

double covering_number_bound(double n_total, double seq_len, double embed_dim,
                             double max_mag, double eta) {
    if (n_total <= 0.0 || seq_len <= 0.0 || embed_dim <= 0.0 || max_mag <= 0.0 || eta <= 0.0)
        throw std::invalid_argument("covering_number_bound: arguments must be positive");
    return n_total * (std::log(1224256.0) + 4.0 * std::log(seq_len) +
                      22.0 * std::log(embed_dim) + 26.0 * std::log(max_mag) - std::log(eta));
}

AffineFeatureReport check_affine_features(const ActivationTrace& trace,
                                          const ConstructionMeta& meta,
                                          const PouApproximator& pou,
                                          std::span<const double> x) {
    if (trace.blocks.empty())
        throw std::invalid_argument("check_affine_features: empty trace");
    const Matrix& z1 = trace.blocks.front().ffn_out;
    const std::size_t p = meta.seq_len;
    if (z1.cols() != p || pou.covering.count() != p)
        throw std::invalid_argument("check_affine_features: shape mismatch");
    AffineFeatureReport rep;
    rep.t_bound = 3.0 * double(p - 1) * meta.pou_scale * double(meta.input_dim) * meta.leak;
    rep.r_bound = double(p - 1) * meta.feature_bound_r * meta.leak;
    for (std::size_t j = 0; j < p; ++j) {
        const auto& c = pou.covering.centers[j];
        double dot = 0.0, c2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            dot += c[k] * x[k];
            c2 += c[k] * c[k];
        }
        const double t_target = 2.0 * meta.pou_scale * dot - meta.pou_scale * c2;
        rep.max_t_error = std::max(rep.max_t_error, std::abs(z1(0, j) - t_target));
        rep.max_r_error = std::max(rep.max_r_error, std::abs(z1(1, j) - pou.values[j]));
    }
    rep.max_ratio = std::max(rep.max_t_error / rep.t_bound, rep.max_r_error / rep.r_bound);
    rep.pass = rep.max_ratio <= 1.0;
    return rep;
}

LipschitzProbeReport param_lipschitz_probe(const TransformerParams& params,
                                           const Domain& domain, double delta,
                                           std::size_t trials, std::uint64_t seed) {
    if (!(delta >= 0.0)) throw std::invalid_argument("param_lipschitz_probe: delta must be >= 0");
    params.validate();
    const double mag = max_magnitude(params);
    const auto points = scan_points(domain, 256, seed);
    std::vector<double> base(points.size());
    parallel_for(points.size(), [&](std::size_t i) { base[i] = forward(params, points[i]); });

    std::vector<double> per_trial(trials, 0.0);
    parallel_for(trials, [&](std::size_t t) {
        Rng rng(seed, t);
        TransformerParams perturbed = params;
        visit_params(perturbed, [&](double& w) {
            w = std::clamp(w + rng.uniform(-delta, delta), -mag, mag);
        });
        double worst = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i)
            worst = std::max(worst, std::abs(forward(perturbed, points[i]) - base[i]));
        per_trial[t] = worst;
    });

    LipschitzProbeReport rep;
    rep.trials = trials;
    rep.delta = delta;
    rep.max_change = trials == 0 ? 0.0 : *std::max_element(per_trial.begin(), per_trial.end());
    const double p = double(params.seq_len);
    const double d = double(params.embed_dim);
    rep.bound_log = std::log(612128.0) + 4.0 * std::log(p) + 22.0 * std::log(d) +
                    25.0 * std::log(std::max(mag, 1e-300)) +
                    std::log(std::max(delta, 1e-300));
    rep.bound = std::exp(rep.bound_log);
    rep.pass = delta == 0.0 ? rep.max_change == 0.0
                            : std::log(std::max(rep.max_change, 1e-300)) <= rep.bound_log;
    return rep;
}

RateReport rate_sweep(const HolderTarget& target, std::span<const double> eps_list,
                      PouMode mode, double tolerance) {
    if (eps_list.size() < 4)
        throw std::invalid_argument("rate_sweep: need at least 4 accuracy values");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (eps_list[i] >= eps_list[i - 1])
            throw std::invalid_argument("rate_sweep: accuracy values must be decreasing");
    target.validate();

    RateReport report;
    report.x_name = "epsilon";
    report.y_name = "count";
    const std::size_t dim = target.input_dim();
    bool errors_ok = true;
    for (double eps : eps_list) {
        PouConfig cfg{eps, mode};
        const PouApproximator pou = build_pou(target, cfg);
        Sampler sampler;
        sampler.n = 10000;
        const auto err =
            sup_error([&](std::span<const double> x) { return pou_eval(pou, x); }, target, sampler);
        RatePoint pt;
        pt.x = eps;
        pt.count = double(pou.covering.count());
        pt.sup_error = err.value;
        // Structural parameter count of the network this estimator induces.
        const std::size_t p = pou.covering.count();
        pt.n_total = double(10 * p * (dim + 4) + 9 * dim * dim + 95 * dim + 236);
        errors_ok = errors_ok && err.value <= eps;
        report.points.push_back(pt);
    }
    std::vector<double> lx, ly;
    for (const RatePoint& pt : report.points) {
        lx.push_back(std::log(1.0 / pt.x));
        ly.push_back(std::log(pt.count));
    }
    const Fit fit = least_squares(lx, ly);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
    report.r2 = fit.r2;
    report.expected_slope = double(target.covering_exponent_dim()) / target.alpha;
    report.tolerance = tolerance;
    report.pass = errors_ok &&
                  std::abs(report.slope - report.expected_slope) <=
                      tolerance * report.expected_slope;
    return report;
}

RateReport generalization_proxy(const HolderTarget& target, double noise_sd,
                                std::span<const std::size_t> n_list, std::uint64_t seed,
                                double tolerance) {
    if (n_list.size() < 4)
        throw std::invalid_argument("generalization_proxy: need at least 4 sample sizes");
    for (std::size_t n : n_list)
        if (n < 50) throw std::invalid_argument("generalization_proxy: each n must be >= 50");
    target.validate();

    const double alpha = target.alpha;
    const double d = double(target.covering_exponent_dim());
    const double b = target.sup_bound;
    RateReport report;
    report.x_name = "n";
    report.y_name = "mse";
    report.expected_slope = -2.0 * alpha / (2.0 * alpha + d);
    report.tolerance = tolerance;

    const auto eval_points = scan_points(target.domain, 10000, seed ^ 0x5eedULL);
    report.points.resize(n_list.size());
    parallel_for(n_list.size(), [&](std::size_t ni) {
        const std::size_t n = n_list[ni];
        const double eps_n = std::pow(double(n), -alpha / (2.0 * alpha + d));
        PouConfig cfg{eps_n, PouMode::theoretical};
        const double r_g = pou_radius(eps_n, target);
        Covering covering;
        if (const auto* spec = std::get_if<ManifoldSpec>(&target.domain))
            covering = manifold_covering(*spec, r_g);
        else
            covering = grid_covering(std::get<CubeDomain>(target.domain).dim, r_g);
        covering = pad_covering(std::move(covering));

        Rng rng(seed, ni);
        std::vector<std::vector<double>> xs(n);
        std::vector<double> ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = sample_domain_point(target.domain, rng);
            ys[i] = target.eval(xs[i]) + noise_sd * rng.normal();
        }

        // Plug-in values: truncated ball means, nearest sample as fallback.
        PouApproximator plug;
        plug.covering = covering;
        plug.scale = scaling_parameter(cfg, target);
        plug.values.resize(covering.count());
        for (std::size_t j = 0; j < covering.count(); ++j) {
            const auto& c = covering.centers[j];
            double acc = 0.0;
            std::size_t hits = 0;
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dist = euclidean_distance(xs[i], c);
                if (dist <= r_g) {
                    acc += ys[i];
                    ++hits;
                }
                if (dist < best) {
                    best = dist;
                    best_i = i;
                }
            }
            const double raw = hits > 0 ? acc / double(hits) : ys[best_i];
            plug.values[j] = std::clamp(raw, -b, b);
        }

        double mse = 0.0;
        for (const auto& x : eval_points) {
            const double pred = std::clamp(pou_eval(plug, x), -b, b);
            const double gap = pred - target.eval(x);
            mse += gap * gap;
        }
        mse /= double(eval_points.size());

        RatePoint pt;
        pt.x = double(n);
        pt.count = double(covering.count());
        pt.mse = mse;
        pt.n_total = double(10 * covering.count() * (target.input_dim() + 4) +
                            9 * target.input_dim() * target.input_dim() +
                            95 * target.input_dim() + 236);
        report.points[ni] = pt;
    });

    std::vector<double> lx, ly;
    for (const RatePoint& pt : report.points) {
        lx.push_back(std::log(pt.x));
        ly.push_back(std::log(pt.mse));
    }
    const Fit fit = least_squares(lx, ly);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
    report.r2 = fit.r2;
    report.pass = std::abs(report.slope - report.expected_slope) <=
                  tolerance * std::abs(report.expected_slope);
    return report;
}

std::vector<CheckResult> verify_construction(const Construction& built,
                                             const HolderTarget* target,
                                             const VerifyOptions& options) {
    const TransformerParams& params = built.params;
    const ConstructionMeta& meta = built.meta;
    params.validate();
    std::vector<CheckResult> results;
    auto add = [&results](const std::string& name, double measured, double limit, bool pass) {
        results.push_back({name, measured, limit, pass});
    };

    const std::size_t p = meta.seq_len;
    const std::size_t d = meta.input_dim;
    const std::size_t embed = d + 4;

    // Architecture shape; everything after this assumes the two-block layout,
    // so a mismatched parameter file stops here.
    {
        bool shape = params.depth() == 2 && params.embed_dim == embed &&
                     params.seq_len == p && params.blocks[0].heads.size() == p + 2 &&
                     params.blocks[0].key_dim == 2 && params.blocks[0].value_dim == 2 &&
                     params.blocks[0].ffn.w1.rows() == 2 * embed &&
                     params.blocks[1].heads.size() == 1 && params.blocks[1].key_dim == 1 &&
                     params.blocks[1].value_dim == 1 &&
                     params.blocks[1].ffn.w1.rows() == 2 * embed;
        add("architecture-shape", shape ? 1.0 : 0.0, 1.0, shape);
        if (!shape) return results;
    }
    if (built.pou.covering.count() != p || built.pou.values.size() != p)
        throw std::invalid_argument(
            "verify_construction: estimator metadata (pou) does not match the network");

    // Parameter accounting: structural sum against the closed form.
    {
        const double measured = double(count_params(params));
        const double formula = double(10 * p * (d + 4) + 9 * d * d + 95 * d + 236);
        add("param-count-closed-form", measured, formula, measured == formula);
    }

    // Probe inputs for the trace-level identities.
    std::vector<std::vector<double>> probes;
    {
        Rng rng(options.seed);
        Domain domain = target ? target->domain : Domain(CubeDomain{d});
        for (std::size_t i = 0; i < options.probe_points; ++i)
            probes.push_back(sample_domain_point(domain, rng));
    }

    const bool trace_attn = p <= 128;
    double peak_dev = 0.0, leak_max = 0.0, pe_scale_dev = 0.0;
    double restore_ind_dev = 0.0, restore_pe_dev = 0.0, readout_dev = 0.0;
    double affine_ratio = 0.0, pou_gap_ratio = 0.0, weight_form_dev = 0.0;
    double attn_col_dev = 0.0, lipschitz_excess = 0.0;
    bool preprocessing_exact = true;

    for (const auto& x : probes) {
        ActivationTrace trace;
        forward(params, x, &trace, trace_attn);

        // Canonical first-stage layout, exact.
        for (std::size_t j = 0; j < p; ++j) {
            const double a = token_angle(j, p);
            for (std::size_t r = 0; r < d; ++r)
                preprocessing_exact &= trace.z0(r, j) == (j == 0 ? x[r] : 0.0);
            preprocessing_exact &= trace.z0(d, j) == (j == 0 ? 1.0 : 0.0);
            preprocessing_exact &= trace.z0(d + 1, j) == 0.0;
            preprocessing_exact &= trace.z0(d + 2, j) == std::sin(a);
            preprocessing_exact &= trace.z0(d + 3, j) == std::cos(a);
        }

        const Matrix& mha1 = trace.blocks[0].mha_out;
        peak_dev = std::max(peak_dev, std::abs(mha1(d + 1, 0) - meta.eta_value));
        for (std::size_t j = 1; j < p; ++j) leak_max = std::max(leak_max, mha1(d + 1, j));
        for (std::size_t j = 0; j < p; ++j) {
            const double a = token_angle(j, p);
            const double s = std::sin(a), co = std::cos(a);
            const double scale = mha1(d + 2, j) * s + mha1(d + 3, j) * co; // sin^2+cos^2 ~ 1
            pe_scale_dev = std::max(pe_scale_dev,
                                    std::abs(scale - meta.lambda_value) /
                                        std::abs(meta.lambda_value));
        }

        const Matrix& z1 = trace.blocks[0].ffn_out;
        for (std::size_t j = 0; j < p; ++j) {
            const double a = token_angle(j, p);
            restore_ind_dev =
                std::max(restore_ind_dev, std::abs(z1(d + 1, j) - (j == 0 ? 1.0 : 0.0)));
            restore_pe_dev = std::max(restore_pe_dev, std::abs(z1(d + 2, j) - std::sin(a)));
            restore_pe_dev = std::max(restore_pe_dev, std::abs(z1(d + 3, j) - std::cos(a)));
        }

        // Readout equals the softmax aggregation recomputed from the trace.
        {
            Vector scores(p);
            for (std::size_t j = 0; j < p; ++j) scores[j] = z1(0, j);
            const Vector w = stable_softmax(scores);
            double agg = 0.0;
            for (std::size_t j = 0; j < p; ++j) agg += w[j] * z1(1, j);
            readout_dev = std::max(readout_dev, std::abs(trace.output - agg));
        }

        affine_ratio = std::max(affine_ratio,
                                check_affine_features(trace, meta, built.pou, x).max_ratio);

        // Both algebraic routes to the estimator weights agree.
        {
            const auto [dist_w, dot_w] = pou_weights_both(built.pou, x);
            for (std::size_t i = 0; i < dist_w.size(); ++i) {
                const double scale = std::max({dist_w[i], dot_w[i], 1e-290});
                weight_form_dev =
                    std::max(weight_form_dev, std::abs(dist_w[i] - dot_w[i]) / scale);
            }
        }

        if (target) {
            const double reference = pou_eval(built.pou, x);
            pou_gap_ratio = std::max(pou_gap_ratio, std::abs(trace.output - reference) /
                                                        meta.impl_error_bound);
        }

        if (trace_attn) {
            for (const Matrix& a : trace.blocks[0].attention) {
                for (std::size_t j = 0; j < a.cols(); ++j) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j);
                    attn_col_dev = std::max(attn_col_dev, std::abs(s - 1.0));
                }
            }
            // Softmax contraction on traced score columns.
            Rng rng(options.seed ^ 0xa77eULL);
            const auto& scores0 = trace.blocks[0].scores;
            for (std::size_t rep = 0; rep < 16 && scores0.size() >= 2; ++rep) {
                const Matrix& ea = scores0[rng.index(scores0.size())];
                const Matrix& eb = scores0[rng.index(scores0.size())];
                const std::size_t col_a = rng.index(ea.cols());
                const std::size_t col_b = rng.index(eb.cols());
                const Vector va = ea.column(col_a);
                const Vector vb = eb.column(col_b);
                const Vector sa = stable_softmax(va);
                const Vector sb = stable_softmax(vb);
                double l1 = 0.0, linf = 0.0;
                for (std::size_t i = 0; i < va.size(); ++i) {
                    l1 += std::abs(sa[i] - sb[i]);
                    linf = std::max(linf, std::abs(va[i] - vb[i]));
                }
                lipschitz_excess = std::max(lipschitz_excess, l1 - 2.0 * linf);
            }
        }
    }

    add("preprocessing-canonical", preprocessing_exact ? 1.0 : 0.0, 1.0, preprocessing_exact);
    add("indicator-peak-dev", peak_dev, 1e-12, peak_dev <= 1e-12);
    add("indicator-leak-max", leak_max, meta.leak, leak_max <= meta.leak);
    add("pe-scale-rel-dev", pe_scale_dev, 1e-10, pe_scale_dev <= 1e-10);
    add("restoration-indicator-dev", restore_ind_dev, 1e-12, restore_ind_dev <= 1e-12);
    add("restoration-pe-dev", restore_pe_dev, 1e-12, restore_pe_dev <= 1e-12);
    add("readout-aggregation-dev", readout_dev, 1e-12, readout_dev <= 1e-12);
    add("affine-feature-ratio", affine_ratio, 1.0, affine_ratio <= 1.0);
    add("weight-form-agreement", weight_form_dev, 1e-10, weight_form_dev <= 1e-10);
    if (target)
        add("impl-error-ratio", pou_gap_ratio, 1.0, pou_gap_ratio <= 1.0);
    if (trace_attn) {
        add("attention-column-sum-dev", attn_col_dev, 1e-12, attn_col_dev <= 1e-12);
        add("softmax-contraction-excess", lipschitz_excess, 1e-12,
            lipschitz_excess <= 1e-12);
    }

    // Restoration margin and the two sine-family scalars.
    add("restoration-margin", double(p + 1) * meta.leak, 1.0,
        double(p + 1) * meta.leak < 1.0);
    {
        const double residual = sine_sum_residual(meta.attn_scale, p);
        add("sine-sum-residual", residual, 1e-10, residual <= 1e-10);
    }

    if (meta.mode == PouMode::theoretical) {
        const double ratio = implementation_error_bound(meta) / (meta.epsilon / 2.0);
        add("impl-bound-equals-half-eps", std::abs(ratio - 1.0), 1e-10,
            std::abs(ratio - 1.0) <= 1e-10);
        Construction shallow;
        shallow.params = params;
        shallow.meta = meta;
        shallow.pou = built.pou;
        if (target) {
            const BoundReport bounds = magnitude_bounds(shallow, *target);
            const double slack = 1.0 + 1e-12; // the caps are re-derived float paths
            add("seq-len-bound", bounds.seq_len_measured, bounds.seq_len_bound,
                bounds.seq_len_measured <= bounds.seq_len_bound * slack);
            add("param-count-bound", bounds.params_measured, bounds.params_bound,
                bounds.params_measured <= bounds.params_bound * slack);
            add("magnitude-bound", bounds.magnitude_measured, bounds.magnitude_bound,
                bounds.magnitude_measured <= bounds.magnitude_bound * slack);
            add("pou-scale-bound", bounds.pou_scale_measured, bounds.pou_scale_bound,
                bounds.pou_scale_measured <= bounds.pou_scale_bound * slack);
        }
    }

    if (target && options.with_sup_error) {
        Sampler sampler;
        sampler.n = options.scan_points;
        sampler.seed = options.seed;
        const auto pou_err = sup_error(
            [&](std::span<const double> x) { return pou_eval(built.pou, x); }, *target, sampler);
        add("pou-sup-error", pou_err.value, meta.epsilon / 2.0,
            pou_err.value <= meta.epsilon / 2.0);
        const auto net_err = sup_error(
            [&](std::span<const double> x) { return forward(params, x); }, *target, sampler);
        add("net-sup-error", net_err.value, meta.epsilon, net_err.value <= meta.epsilon);
    }

    if (const auto* spec = target ? std::get_if<ManifoldSpec>(&target->domain) : nullptr) {
        if (spec->kind != ManifoldKind::point_cloud) {
            const MetricReport metric = check_metric_equivalence(*spec, 1000, options.seed);
            add("metric-equivalence-violations", double(metric.violations), 0.0, metric.ok);
        }
        const CoverReport cover =
            verify_covering(built.pou.covering, target->domain, 10000, options.seed);
        add("covering-max-gap", cover.max_gap, built.pou.covering.radius, cover.ok);
    }

    return results;
}

bool all_pass(const std::vector<CheckResult>& results) {
    for (const CheckResult& r : results)
        if (!r.pass) return false;
    return true;
}

} // namespace softpou
