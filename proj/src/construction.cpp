#include "softpou/construction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace softpou {

namespace {

constexpr double kPi = std::numbers::pi;

double token_angle(std::size_t token, std::size_t seq_len) {
    return 2.0 * kPi * double(token + 1) / double(seq_len);
}

Vector cos_exponents(double attn_scale, std::size_t seq_len) {
    Vector e(seq_len);
    for (std::size_t i = 0; i < seq_len; ++i)
        e[i] = attn_scale * std::cos(token_angle(i, seq_len));
    return e;
}

double floored_sup_bound(double b) { return std::max(b, 1e-8); }

} // namespace

double spectral_gap(std::size_t seq_len) {
    if (seq_len < 2) throw std::invalid_argument("spectral_gap: sequence length must be >= 2");
    const double s = std::sin(kPi / double(seq_len));
    return 2.0 * s * s; // == 1 - cos(2 pi / P), cancellation-free
}

namespace {

// Kahan-compensated accumulator; the closed-form scalars are compared against
// traced activations at 1e-12, so plain serial sums over P ~ 1e4 terms would
// already spend that budget on rounding.
struct Compensated {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

} // namespace

double eta(double attn_scale, std::size_t seq_len) {
    if (seq_len < 2) throw std::invalid_argument("eta: sequence length must be >= 2");
    if (attn_scale < 0.0) throw std::invalid_argument("eta: scale must be >= 0");
    const Vector e = cos_exponents(attn_scale, seq_len);
    const double peak = *std::max_element(e.begin(), e.end());
    Compensated denom;
    for (double v : e) denom.add(std::exp(v - peak));
    return std::exp(attn_scale - peak) / denom.sum;
}

double lambda_coef(double attn_scale, std::size_t seq_len) {
    if (seq_len < 2) throw std::invalid_argument("lambda_coef: sequence length must be >= 2");
    if (attn_scale < 0.0) throw std::invalid_argument("lambda_coef: scale must be >= 0");
    const Vector e = cos_exponents(attn_scale, seq_len);
    const double peak = *std::max_element(e.begin(), e.end());
    Compensated denom, num;
    for (std::size_t i = 0; i < seq_len; ++i) {
        const double w = std::exp(e[i] - peak);
        denom.add(w);
        num.add(w * std::cos(token_angle(i, seq_len)));
    }
    return num.sum / denom.sum;
}

double choose_attention_scale(double epsilon, std::size_t seq_len, double sup_bound,
                              double pou_scale, std::size_t dim) {
    if (seq_len < 2) throw std::invalid_argument("choose_attention_scale: seq_len must be >= 2");
    if (!(epsilon > 0.0)) throw std::invalid_argument("choose_attention_scale: eps must be > 0");
    if (!(sup_bound > 0.0) || !(pou_scale > 0.0))
        throw std::invalid_argument("choose_attention_scale: bounds must be positive");
    const double c = spectral_gap(seq_len);
    const double arg = 2.0 * double(seq_len - 1) * sup_bound *
                       (1.0 + 6.0 * pou_scale * double(dim)) / epsilon;
    return std::log(arg) / c;
}

void synth_preprocessing(TransformerParams& params, std::size_t input_dim,
                         std::size_t seq_len) {
    if (seq_len < 2) throw std::invalid_argument("synth_preprocessing: seq_len must be >= 2");
    const std::size_t d = input_dim;
    const std::size_t embed = d + 4;
    params.input_dim = d;
    params.embed_dim = embed;
    params.seq_len = seq_len;
    params.embed_w = Matrix(embed, d);
    for (std::size_t r = 0; r < d; ++r) params.embed_w(r, r) = 1.0;
    params.embed_b = Vector(embed, 0.0);
    params.embed_b[d] = 1.0; // indicator channel
    params.positional = Matrix(embed, seq_len);
    for (std::size_t j = 0; j < seq_len; ++j) {
        const double a = token_angle(j, seq_len);
        params.positional(d + 2, j) = std::sin(a);
        params.positional(d + 3, j) = std::cos(a);
    }
}

EncoderBlock synth_mha_affine(const std::vector<std::vector<double>>& centers,
                              const std::vector<double>& values, double pou_scale,
                              double attn_scale) {
    const std::size_t p = centers.size();
    if (p < 2) throw std::invalid_argument("synth_mha_affine: need at least 2 centers");
    if (values.size() != p)
        throw std::invalid_argument("synth_mha_affine: centers/values length mismatch");
    const std::size_t d = centers.front().size();
    const std::size_t embed = d + 4;
    const double peak = eta(attn_scale, p);
    if (!(peak > 0.0) || !std::isfinite(1.0 / peak))
        throw std::invalid_argument("synth_mha_affine: degenerate peak attention weight");

    EncoderBlock block;
    block.key_dim = 2;
    block.value_dim = 2;
    block.heads.reserve(p + 2);

    // Affine heads: rotation query aligns the attention peak with token 1,
    // key is M*I on the positional rows, value carries the target affine map
    // pre-scaled by 1/eta.
    for (std::size_t h = 0; h < p; ++h) {
        AttentionHead head;
        head.query = Matrix(2, embed);
        const double delta = token_angle(0, p) - token_angle(h, p);
        head.query(0, d + 2) = std::cos(delta);
        head.query(0, d + 3) = std::sin(delta);
        head.query(1, d + 2) = -std::sin(delta);
        head.query(1, d + 3) = std::cos(delta);
        head.key = Matrix(2, embed);
        head.key(0, d + 2) = attn_scale;
        head.key(1, d + 3) = attn_scale;
        head.value = Matrix(2, embed);
        for (std::size_t k = 0; k < d; ++k)
            head.value(0, k) = 2.0 * pou_scale * centers[h][k] / peak;
        double c2 = 0.0;
        for (double v : centers[h]) c2 += v * v;
        head.value(0, d) = -pou_scale * c2 / peak;
        head.value(1, d) = values[h] / peak;
        block.heads.push_back(std::move(head));
    }

    // Indicator head: routes the first-token flag through the positional
    // attention pattern.
    {
        AttentionHead head;
        head.query = Matrix(2, embed);
        head.query(0, d + 2) = 1.0;
        head.query(1, d + 3) = 1.0;
        head.key = Matrix(2, embed);
        head.key(0, d + 2) = attn_scale;
        head.key(1, d + 3) = attn_scale;
        head.value = Matrix(2, embed);
        head.value(0, d) = 1.0;
        block.heads.push_back(std::move(head));
    }

    // Positional-encoding head: value is the PE itself; the output is the PE
    // scaled by lambda(M) thanks to the sine-sum cancellation.
    {
        AttentionHead head;
        head.query = Matrix(2, embed);
        head.query(0, d + 2) = 1.0;
        head.query(1, d + 3) = 1.0;
        head.key = Matrix(2, embed);
        head.key(0, d + 2) = attn_scale;
        head.key(1, d + 3) = attn_scale;
        head.value = Matrix(2, embed);
        head.value(0, d + 2) = 1.0;
        head.value(1, d + 3) = 1.0;
        block.heads.push_back(std::move(head));
    }

    // Output projection: sum affine heads into rows 0..1, indicator-head row 0
    // into the indicator channel, PE head into the positional rows.
    block.out_proj = Matrix(embed, 2 * (p + 2));
    for (std::size_t h = 0; h < p; ++h) {
        block.out_proj(0, 2 * h) = 1.0;
        block.out_proj(1, 2 * h + 1) = 1.0;
    }
    block.out_proj(d + 1, 2 * p) = 1.0;
    block.out_proj(d + 2, 2 * (p + 1)) = 1.0;
    block.out_proj(d + 3, 2 * (p + 1) + 1) = 1.0;
    return block;
}

FeedForward synth_ffn_restore(double attn_scale, std::size_t seq_len, std::size_t input_dim) {
    const std::size_t d = input_dim;
    const std::size_t embed = d + 4;
    const double c = spectral_gap(seq_len);
    const double leak = std::exp(-c * attn_scale);
    if (double(seq_len + 1) * leak >= 1.0)
        throw std::domain_error(
            "ffn restoration margin violated: (P+1)*exp(-c*M) = " +
            std::to_string(double(seq_len + 1) * leak) + " must be < 1");
    const double peak = eta(attn_scale, seq_len);
    const double pe_scale = lambda_coef(attn_scale, seq_len);
    if (!(pe_scale > 0.0))
        throw std::domain_error("ffn restoration: positional scale must be positive; got " +
                                std::to_string(pe_scale));
    const double w_ind = 1.0 / (peak - 2.0 * leak);

    FeedForward ffn;
    ffn.w1 = Matrix(2 * embed, embed);
    for (std::size_t r = 0; r < embed; ++r) {
        ffn.w1(r, r) = 1.0;
        ffn.w1(embed + r, r) = -1.0;
    }
    ffn.b1 = Vector(2 * embed, 0.0);
    ffn.b1[d + 1] = -2.0 * leak; // threshold on the indicator channel
    ffn.w2 = Matrix(embed, 2 * embed);
    for (std::size_t r = 0; r < embed; ++r) {
        double scale = 1.0;
        if (r == d + 1) scale = w_ind;
        if (r == d + 2 || r == d + 3) scale = 1.0 / pe_scale;
        ffn.w2(r, r) = scale;
        ffn.w2(r, embed + r) = -scale;
    }
    ffn.b2 = Vector(embed, 0.0);
    return ffn;
}

EncoderBlock synth_mha_pou(std::size_t input_dim) {
    const std::size_t d = input_dim;
    const std::size_t embed = d + 4;
    EncoderBlock block;
    block.key_dim = 1;
    block.value_dim = 1;
    AttentionHead head;
    head.query = Matrix(1, embed);
    head.query(0, d + 1) = 1.0; // restored indicator row
    head.key = Matrix(1, embed);
    head.key(0, 0) = 1.0; // affine feature row
    head.value = Matrix(1, embed);
    head.value(0, 1) = 1.0; // expert feature row
    block.heads.push_back(std::move(head));
    block.out_proj = Matrix(embed, 1);
    block.out_proj(0, 0) = 1.0;
    return block;
}

FeedForward synth_ffn_identity(std::size_t embed_dim) {
    FeedForward ffn;
    ffn.w1 = Matrix(2 * embed_dim, embed_dim);
    for (std::size_t r = 0; r < embed_dim; ++r) {
        ffn.w1(r, r) = 1.0;
        ffn.w1(embed_dim + r, r) = -1.0;
    }
    ffn.b1 = Vector(2 * embed_dim, 0.0);
    ffn.w2 = Matrix(embed_dim, 2 * embed_dim);
    for (std::size_t r = 0; r < embed_dim; ++r) {
        ffn.w2(r, r) = 1.0;
        ffn.w2(r, embed_dim + r) = -1.0;
    }
    ffn.b2 = Vector(embed_dim, 0.0);
    return ffn;
}

void ConstructionMeta::validate() const {
    if (seq_len < 2) throw std::runtime_error("meta: sequence length must be >= 2");
    if (!(gap > 0.0) || gap > 2.0 + 1e-12)
        throw std::runtime_error("meta: spectral gap out of range");
    if (eta_value < 1.0 / double(seq_len) - 1e-12 || eta_value > 1.0 + 1e-12)
        throw std::runtime_error("meta: peak attention weight out of range");
    if (1.0 - eta_value > double(seq_len - 1) * leak + 1e-12)
        throw std::runtime_error("meta: peak attention weight violates its leak bound");
    if (lambda_value > 0.0) { // the bound is asserted only in the large-scale regime
        const double drop = 1.0 - lambda_value;
        if (drop < -1e-12 || drop > 2.0 * double(seq_len - 1) * leak + 1e-12)
            throw std::runtime_error("meta: positional scale violates its leak bound");
    }
    if (double(seq_len + 1) * leak >= 1.0)
        throw std::runtime_error("meta: restoration margin violated");
    if (!(impl_error_bound > 0.0) || !std::isfinite(impl_error_bound))
        throw std::runtime_error("meta: implementation error bound must be positive");
}

double implementation_error_bound(const ConstructionMeta& meta) {
    return double(meta.seq_len - 1) * meta.feature_bound_r *
           (1.0 + 6.0 * meta.pou_scale * double(meta.input_dim)) *
           std::exp(-meta.gap * meta.attn_scale);
}

TheoryConstants theory_constants(const HolderTarget& target) {
    TheoryConstants k;
    const double a = target.alpha;
    const double ch = target.holder_const;
    const double b = floored_sup_bound(target.sup_bound);
    const double d = double(target.covering_exponent_dim());
    const double dim = double(target.input_dim()); // ambient on manifolds
    // Degenerate certificates (B near zero) drive the log factor negative,
    // where the tail constraint it encodes is vacuous; flooring it at zero
    // keeps the constant an upper bound. The scale formula applies the same
    // floor, so measured scales stay below this cap.
    if (const auto* spec = std::get_if<ManifoldSpec>(&target.domain)) {
        k.c_manifold = std::pow(3.0, d) * spec->volume * std::pow(d, d / 2.0);
        k.c_p = k.c_manifold * std::pow(16.0 * ch, d / a);
        k.c_m = std::pow(16.0 * ch, 2.0 / a) / 3.0 *
                (std::max(0.0, std::log(4.0 * b * k.c_p)) + (d + a) / a);
        k.c_log = std::abs(std::log(2.0 * k.c_p * b * (1.0 + 6.0 * dim * k.c_m))) +
                  (d + 2.0 + a) / a + 2.0;
    } else {
        k.c_p = std::pow(d, d / 2.0) * std::pow(8.0 * ch, d / a);
        k.c_m = std::pow(8.0 * ch, 2.0 / a) / 3.0 *
                (std::max(0.0, std::log(4.0 * b * std::pow(std::sqrt(d) *
                                                               std::pow(4.0 * ch, 1.0 / a),
                                                           d))) +
                 (d + a) / a);
        k.c_log = std::abs(std::log(4.0 * k.c_p * b * (1.0 + 6.0 * dim * k.c_m))) +
                  (d + 2.0 + a) / a + 2.0;
    }
    k.c_n = 10.0 * (dim + 4.0) * k.c_p + 9.0 * dim * dim + 95.0 * dim + 236.0;
    k.c_mag = k.c_p * k.c_p * k.c_log / 8.0;
    k.c_b = std::max({3.0 * dim * k.c_m, b, 1.0});
    // The 1/(1 - 1/(eB)) term binds only when eB > 1; otherwise it is not a
    // valid upper bound and the remaining terms dominate.
    double first = -std::numeric_limits<double>::infinity();
    if (std::numbers::e * b > 1.0) first = 1.0 / (1.0 - 1.0 / (std::numbers::e * b));
    k.c_mag_tilde = std::max({first, k.c_mag,
                              2.0 * (1.0 + 1.0 / (2.0 * std::numbers::e * b)) * k.c_b});
    return k;
}

namespace {

// Smallest attention scale (doubling + bisection on the scanned end-to-end
// error) still achieving error <= eps, capped by the theoretical scale.
double calibrate_attention_scale(const HolderTarget& target, const PouApproximator& pou,
                                 double epsilon, double theoretical) {
    const std::size_t p = pou.covering.count();
    const std::size_t dim = target.input_dim();
    const double c = spectral_gap(p);
    // Validity floor: (P+1) e^{-cM} <= 1/2 and lambda(M) > 0.
    double lo = std::log(2.0 * double(p + 1)) / c;
    while (lambda_coef(lo, p) <= 0.0) lo *= 1.5;
    if (lo >= theoretical) return theoretical;

    auto scan_error = [&](double m) {
        TransformerParams params;
        synth_preprocessing(params, dim, p);
        EncoderBlock block1 = synth_mha_affine(pou.covering.centers, pou.values, pou.scale, m);
        block1.ffn = synth_ffn_restore(m, p, dim);
        params.blocks.push_back(std::move(block1));
        EncoderBlock block2 = synth_mha_pou(dim);
        block2.ffn = synth_ffn_identity(params.embed_dim);
        params.blocks.push_back(std::move(block2));
        params.readout = Vector(params.embed_dim * p, 0.0);
        params.readout[0] = 1.0;
        Sampler s;
        s.n = 400;
        return sup_error([&](std::span<const double> x) { return forward(params, x); }, target, s)
            .value;
    };

    if (scan_error(theoretical) > epsilon) return theoretical; // keep the closed form
    double hi = lo;
    while (hi < theoretical && scan_error(hi) > epsilon) hi = std::min(theoretical, hi * 2.0);
    double good = hi;
    double bad = hi > lo ? hi / 2.0 : lo;
    for (int iter = 0; iter < 30 && good - bad > 1e-3 * good; ++iter) {
        const double mid = 0.5 * (bad + good);
        if (mid <= lo) break;
        if (scan_error(mid) <= epsilon)
            good = mid;
        else
            bad = mid;
    }
    return good;
}

} // namespace

Construction assemble(const HolderTarget& target, const PouConfig& cfg) {
    target.validate();
    const double e_inv = std::exp(-1.0);
    if (!(cfg.epsilon > 0.0) || cfg.epsilon > e_inv)
        throw std::domain_error("assembly admissibility: accuracy must lie in (0, 1/e]; got " +
                                std::to_string(cfg.epsilon));
    // The reference estimator takes half the error budget; its own
    // admissibility check covers the manifold-specific cap.
    PouConfig half = cfg;
    half.epsilon = cfg.epsilon / 2.0;
    PouApproximator pou = build_pou(target, half);

    const std::size_t p = pou.covering.count();
    const std::size_t dim = target.input_dim();
    const double b = target.sup_bound;
    const double theoretical_m = choose_attention_scale(cfg.epsilon, p, b, pou.scale, dim);
    double attn_scale = theoretical_m;
    if (cfg.mode == PouMode::calibrated)
        attn_scale = calibrate_attention_scale(target, pou, cfg.epsilon, theoretical_m);

    Construction out;
    synth_preprocessing(out.params, dim, p);
    EncoderBlock block1 = synth_mha_affine(pou.covering.centers, pou.values, pou.scale, attn_scale);
    block1.ffn = synth_ffn_restore(attn_scale, p, dim); // throws if the margin fails
    out.params.blocks.push_back(std::move(block1));
    EncoderBlock block2 = synth_mha_pou(dim);
    block2.ffn = synth_ffn_identity(out.params.embed_dim);
    out.params.blocks.push_back(std::move(block2));
    out.params.readout = Vector(out.params.embed_dim * p, 0.0);
    out.params.readout[0] = 1.0;
    out.params.validate();

    ConstructionMeta& meta = out.meta;
    meta.epsilon = cfg.epsilon;
    meta.seq_len = p;
    meta.input_dim = dim;
    meta.pou_scale = pou.scale;
    meta.attn_scale = attn_scale;
    meta.gap = spectral_gap(p);
    meta.eta_value = eta(attn_scale, p);
    meta.lambda_value = lambda_coef(attn_scale, p);
    meta.leak = std::exp(-meta.gap * attn_scale);
    meta.feature_bound_t = 3.0 * pou.scale * double(dim);
    meta.feature_bound_r = b;
    meta.impl_error_bound = implementation_error_bound(meta);
    meta.mode = cfg.mode;
    meta.constants = theory_constants(target);
    const double a = target.alpha;
    const double d_over_a = double(target.covering_exponent_dim()) / a;
    meta.seq_len_bound = meta.constants.c_p * std::pow(cfg.epsilon, -d_over_a);
    meta.param_count_bound = meta.constants.c_n * std::pow(cfg.epsilon, -d_over_a);
    meta.magnitude_bound = meta.constants.c_mag_tilde * std::pow(cfg.epsilon, -2.0 * d_over_a) *
                           std::log(1.0 / cfg.epsilon);
    meta.pou_scale_bound = meta.constants.c_m * std::pow(cfg.epsilon, -2.0 / a) *
                           std::log(2.0 / cfg.epsilon);
    meta.validate();

    out.pou = std::move(pou);
    return out;
}

BoundReport magnitude_bounds(const Construction& built, const HolderTarget& target) {
    (void)target;
    BoundReport r;
    const ConstructionMeta& meta = built.meta;
    r.seq_len_measured = double(meta.seq_len);
    r.seq_len_bound = meta.seq_len_bound;
    r.params_measured = double(count_params(built.params));
    r.params_bound = meta.param_count_bound;
    r.magnitude_measured = max_magnitude(built.params);
    r.magnitude_bound = meta.magnitude_bound;
    r.pou_scale_measured = meta.pou_scale;
    r.pou_scale_bound = meta.pou_scale_bound;
    const double slack = 1.0 + 1e-12;
    r.pass = r.seq_len_measured <= r.seq_len_bound * slack &&
             r.params_measured <= r.params_bound * slack &&
             r.magnitude_measured <= r.magnitude_bound * slack &&
             r.pou_scale_measured <= r.pou_scale_bound * slack;
    return r;
}

} // namespace softpou
