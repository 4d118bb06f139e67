#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rng.hpp"
#include "softpou/analysis.hpp"
#include "softpou/construction.hpp"
#include "softpou/io.hpp"
#include "softpou/targets.hpp"

using namespace softpou;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("spectral gap closed values") {
    CHECK(spectral_gap(2) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(spectral_gap(4) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(spectral_gap(6) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(spectral_gap(1), std::invalid_argument);
}

TEST_CASE("peak attention weight: uniform limit and two-token value") {
    for (std::size_t p : {2, 3, 5, 9})
        CHECK(eta(0.0, p) == doctest::Approx(1.0 / double(p)).epsilon(1e-14));
    // P=2: e / (e + e^{-1}) = 1/(1+e^{-2}).
    CHECK(eta(1.0, 2) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-14));
    CHECK(eta(1.0, 2) == doctest::Approx(0.88080).epsilon(1e-4));
}

TEST_CASE("peak attention weight obeys its leak bound") {
    for (std::size_t p : {2, 4, 8, 16, 33}) {
        for (double m : {1.0, 10.0, 50.0, 400.0}) {
            const double c = spectral_gap(p);
            const double value = eta(m, p);
            CHECK(value <= 1.0);
            CHECK(value > 1.0 / double(p) - 1e-14);
            CHECK(1.0 - value <= double(p - 1) * std::exp(-c * m) + 1e-14);
        }
    }
    // M = 50, P = 8: within (P-1) e^{-50c} of 1.
    const double c8 = spectral_gap(8);
    CHECK(1.0 - eta(50.0, 8) <= 7.0 * std::exp(-50.0 * c8));
}

TEST_CASE("positional scale: root-of-unity limit and two-token value") {
    for (std::size_t p : {2, 3, 4, 7, 12})
        CHECK(std::abs(lambda_coef(0.0, p)) <= 1e-14);
    CHECK(lambda_coef(1.0, 2) == doctest::Approx(std::tanh(1.0)).epsilon(1e-14));
    CHECK(lambda_coef(1.0, 2) == doctest::Approx(0.76159).epsilon(1e-4));
}

TEST_CASE("positional scale obeys its leak bound at large M") {
    const double c = spectral_gap(8);
    for (double m : {20.0, 50.0, 200.0}) {
        const double lam = lambda_coef(m, 8);
        const double drop = 1.0 - lam;
        CHECK(drop >= -1e-14);
        CHECK(drop <= 2.0 * 7.0 * std::exp(-c * m) + 1e-14);
    }
}

TEST_CASE("eta and lambda stay finite for very large scales") {
    const double e1 = eta(1000.0, 16);
    const double l1 = lambda_coef(1000.0, 16);
    CHECK(std::isfinite(e1));
    CHECK(std::isfinite(l1));
    CHECK(e1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("attention scale: hand value and exact inverse") {
    // P=2, B=1, M_g=1, d=1, eps=1: (1/2) log(2*1*1*7/1) = log(14)/2.
    const double m = choose_attention_scale(1.0, 2, 1.0, 1.0, 1);
    CHECK(m == doctest::Approx(0.5 * std::log(14.0)).epsilon(1e-15));
    CHECK(m == doctest::Approx(1.3195).epsilon(1e-4));

    Rng rng(3);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t p = 2 + rng.index(40);
        const double b = rng.uniform(0.1, 3.0);
        const double mg = rng.uniform(0.5, 5000.0);
        const std::size_t dim = 1 + rng.index(4);
        const double eps = rng.uniform(0.05, 0.36);
        const double scale = choose_attention_scale(eps, p, b, mg, dim);
        const double bound = double(p - 1) * b * (1.0 + 6.0 * mg * double(dim)) *
                             std::exp(-spectral_gap(p) * scale);
        CHECK(std::abs(bound - eps / 2.0) <= 1e-10 * (eps / 2.0));
        // Margin needed by the restoring FFN holds on these instances.
        CHECK(double(p + 1) * std::exp(-spectral_gap(p) * scale) < 1.0);
    }
    CHECK_THROWS_AS(choose_attention_scale(0.0, 4, 1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(choose_attention_scale(0.2, 1, 1.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("synthesized pre-processing keeps parameter magnitudes at one") {
    TransformerParams params;
    synth_preprocessing(params, 3, 12);
    double m = 0.0;
    for (std::size_t i = 0; i < params.embed_w.size(); ++i)
        m = std::max(m, std::abs(params.embed_w.data()[i]));
    for (double v : params.embed_b) m = std::max(m, std::abs(v));
    for (std::size_t i = 0; i < params.positional.size(); ++i)
        m = std::max(m, std::abs(params.positional.data()[i]));
    CHECK(m == 1.0);
}

TEST_CASE("restoring FFN refuses an insufficient scale") {
    CHECK_THROWS_AS(synth_ffn_restore(0.5, 16, 1), std::domain_error);
}

TEST_CASE("aggregation head: uniform features average, dominant features win") {
    const std::size_t d = 1, p = 4, embed = d + 4;
    EncoderBlock block = synth_mha_pou(d);
    block.ffn = synth_ffn_identity(embed);

    // Hand-built restored state: rows [T, R, 0, indicator, sin, cos].
    Matrix z1(embed, p);
    for (std::size_t j = 0; j < p; ++j) {
        z1(0, j) = 2.0;       // equal affine features
        z1(1, j) = double(j); // expert features 0,1,2,3
        z1(d + 1, j) = j == 0 ? 1.0 : 0.0;
        z1(d + 2, j) = std::sin(2.0 * kPi * double(j + 1) / double(p));
        z1(d + 3, j) = std::cos(2.0 * kPi * double(j + 1) / double(p));
    }
    Matrix out = mha_forward(block, z1);
    CHECK(out(0, 0) == doctest::Approx(1.5).epsilon(1e-13)); // mean of 0..3
    // Non-query columns carry the plain average as well.
    CHECK(out(0, 2) == doctest::Approx(1.5).epsilon(1e-13));
    for (std::size_t r = 1; r < embed; ++r) CHECK(out(r, 0) == 0.0);

    // One dominant affine feature pulls the aggregate onto its expert value.
    z1(0, 2) = 60.0;
    out = mha_forward(block, z1);
    CHECK(out(0, 0) == doctest::Approx(z1(1, 2)).epsilon(1e-15));

    // The identity FFN leaves the aggregated state untouched.
    const Matrix after = ffn_forward(block.ffn, out);
    for (std::size_t i = 0; i < after.size(); ++i) CHECK(after.data()[i] == out.data()[i]);
}

TEST_CASE("assembled network: canonical stages at every probe") {
    const HolderTarget target = make_sin1d();
    const Construction built = assemble(target, {0.3, PouMode::theoretical});
    const ConstructionMeta& meta = built.meta;
    const std::size_t p = meta.seq_len;
    const std::size_t d = meta.input_dim;

    CHECK(p == built.pou.covering.count());
    CHECK(built.params.embed_dim == d + 4);
    CHECK(built.params.blocks[0].heads.size() == p + 2);
    CHECK(built.params.blocks[1].heads.size() == 1);
    CHECK(built.params.blocks[0].ffn.w1.rows() == 2 * (d + 4));

    Rng rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        const std::vector<double> x = {rng.uniform01()};
        ActivationTrace trace;
        const double y = forward(built.params, x, &trace, true);

        // Peak indicator equals the closed-form scalar; the rest leaks below
        // e^{-cM}.
        const Matrix& mha1 = trace.blocks[0].mha_out;
        CHECK(std::abs(mha1(d + 1, 0) - meta.eta_value) <= 1e-12);
        for (std::size_t j = 1; j < p; ++j) {
            CHECK(mha1(d + 1, j) >= 0.0);
            CHECK(mha1(d + 1, j) <= meta.leak);
        }

        // Positional rows scale by lambda.
        for (std::size_t j = 0; j < p; ++j) {
            const double a = 2.0 * kPi * double(j + 1) / double(p);
            const double scale = mha1(d + 2, j) * std::sin(a) + mha1(d + 3, j) * std::cos(a);
            CHECK(std::abs(scale - meta.lambda_value) <=
                  1e-10 * std::abs(meta.lambda_value));
        }

        // Restoration is exact.
        CHECK(check_restoration(trace, p));

        // Readout equals the aggregation recomputed from the trace.
        const Matrix& z1 = trace.blocks[0].ffn_out;
        Vector scores(p);
        for (std::size_t j = 0; j < p; ++j) scores[j] = z1(0, j);
        const Vector w = stable_softmax(scores);
        double agg = 0.0;
        for (std::size_t j = 0; j < p; ++j) agg += w[j] * z1(1, j);
        CHECK(std::abs(y - agg) <= 1e-12);

        // Affine features stay inside their leak envelopes.
        const AffineFeatureReport features = check_affine_features(trace, meta, built.pou, x);
        CHECK(features.pass);
        CHECK(features.max_ratio <= 1.0);
    }
}

TEST_CASE("assembled network at a center: affine feature against the closed form") {
    const HolderTarget target = make_sin1d();
    const Construction built = assemble(target, {0.25, PouMode::theoretical});
    const auto& c1 = built.pou.covering.centers[0];
    ActivationTrace trace;
    forward(built.params, c1, &trace);
    const double t_target = built.meta.pou_scale * c1[0] * c1[0]; // 2 M_g |c|^2 - M_g |c|^2
    const double bound = 3.0 * double(built.meta.seq_len - 1) * built.meta.pou_scale *
                         double(built.meta.input_dim) * built.meta.leak;
    CHECK(std::abs(trace.blocks[0].ffn_out(0, 0) - t_target) <= bound);
}

TEST_CASE("assembled network approximates the target and its reference estimator") {
    const HolderTarget target = make_sin1d();
    const double eps = 0.3;
    const Construction built = assemble(target, {eps, PouMode::theoretical});

    Sampler s;
    s.n = 10000;
    const auto err = sup_error(
        [&](std::span<const double> x) { return forward(built.params, x); }, target, s);
    CHECK(err.value <= eps);

    // Against the reference estimator with identical centers and scale.
    Rng rng(7);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::vector<double> x = {rng.uniform01()};
        worst = std::max(worst,
                         std::abs(forward(built.params, x) - pou_eval(built.pou, x)));
    }
    CHECK(worst <= built.meta.impl_error_bound);
    CHECK(built.meta.impl_error_bound == doctest::Approx(eps / 2.0).epsilon(1e-10));
}

TEST_CASE("parameter count and magnitude bounds on assembled networks") {
    for (double eps : {0.35, 0.25}) {
        const HolderTarget target = make_sin1d();
        const Construction built = assemble(target, {eps, PouMode::theoretical});
        const std::size_t p = built.meta.seq_len;
        CHECK(count_params(built.params) == 10 * p * 5 + 9 + 95 + 236);
        const BoundReport bounds = magnitude_bounds(built, target);
        CHECK(bounds.pass);
        CHECK(bounds.magnitude_measured <= bounds.magnitude_bound);
        CHECK(double(p) <= bounds.seq_len_bound);
    }
}

TEST_CASE("implementation error bound scales like the leak") {
    const HolderTarget target = make_sin1d();
    const Construction built = assemble(target, {0.3, PouMode::theoretical});
    ConstructionMeta doubled = built.meta;
    doubled.attn_scale *= 2.0;
    const double ratio =
        implementation_error_bound(doubled) / implementation_error_bound(built.meta);
    CHECK(ratio ==
          doctest::Approx(std::exp(-built.meta.gap * built.meta.attn_scale)).epsilon(1e-10));
}

TEST_CASE("calibrated mode: smaller scales, same guarantees") {
    const HolderTarget target = make_sin1d();
    const double eps = 0.25;
    const Construction theo = assemble(target, {eps, PouMode::theoretical});
    const Construction cal = assemble(target, {eps, PouMode::calibrated});
    CHECK(cal.meta.attn_scale <= theo.meta.attn_scale * (1.0 + 1e-12));
    CHECK(cal.meta.pou_scale <= theo.meta.pou_scale * (1.0 + 1e-12));

    Sampler s;
    s.n = 10000;
    const auto err =
        sup_error([&](std::span<const double> x) { return forward(cal.params, x); }, target, s);
    CHECK(err.value <= eps);

    // The identity suite holds in calibrated mode too.
    VerifyOptions options;
    options.with_sup_error = false;
    const auto checks = verify_construction(cal, &target, options);
    CHECK(all_pass(checks));
}

TEST_CASE("manifold assembly reuses the cube synthesis with the ambient dimension") {
    const HolderTarget target = make_circle_angle();
    const double eps = 0.3;
    const Construction built = assemble(target, {eps, PouMode::theoretical});
    CHECK(built.meta.input_dim == 2);
    CHECK(built.params.embed_dim == 6);
    CHECK(built.params.blocks[0].ffn.w1.rows() == 2 * 6);
    const std::size_t p = built.meta.seq_len;
    CHECK(count_params(built.params) == 10 * p * 6 + 9 * 4 + 95 * 2 + 236);

    Sampler s;
    s.n = 4000;
    const auto err = sup_error(
        [&](std::span<const double> x) { return forward(built.params, x); }, target, s);
    CHECK(err.value <= eps);

    const BoundReport bounds = magnitude_bounds(built, target);
    CHECK(bounds.pass);
}

TEST_CASE("duplicated-center assembly stays consistent") {
    HolderTarget t;
    t.name = "flat";
    t.domain = CubeDomain{1};
    t.eval = [](std::span<const double>) { return 0.25; };
    t.alpha = 1.0;
    t.holder_const = 0.0625; // (eps/2)/(4 C_H) hits r = 1/2 exactly: one cell
    t.sup_bound = 0.3;
    const Construction built = assemble(t, {0.25, PouMode::theoretical});
    CHECK(built.meta.seq_len == 2);
    CHECK(built.pou.covering.centers[0] == built.pou.covering.centers[1]);
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const std::vector<double> x = {rng.uniform01()};
        // Constant target: the reference estimator is exact, so the network
        // deviates by at most the implementation-error budget.
        CHECK(std::abs(forward(built.params, x) - 0.25) <= built.meta.impl_error_bound);
    }
    Sampler s;
    s.n = 1000;
    CHECK(sup_error([&](std::span<const double> x) { return forward(built.params, x); }, t, s)
              .value <= 0.25);
}

TEST_CASE("assembly admissibility errors carry diagnostics") {
    const HolderTarget target = make_sin1d();
    CHECK_THROWS_AS(assemble(target, {0.5, PouMode::theoretical}), std::domain_error);
    CHECK_THROWS_AS(assemble(target, {-0.1, PouMode::theoretical}), std::domain_error);
    // Manifold cap 16 C_H (reach/4)^alpha binds below 1/e once C_H is small.
    HolderTarget gentle = make_circle_angle();
    gentle.eval = [](std::span<const double>) { return 0.05; };
    gentle.holder_const = 0.1; // cap = 16 * 0.1 * 0.125 = 0.2
    gentle.sup_bound = 0.1;
    CHECK_THROWS_AS(assemble(gentle, {0.3, PouMode::theoretical}), std::domain_error);
    CHECK_NOTHROW(assemble(gentle, {0.19, PouMode::theoretical}));
}

TEST_CASE("near-zero targets keep every ledger constant finite") {
    HolderTarget t;
    t.name = "tiny";
    t.domain = CubeDomain{1};
    t.eval = [](std::span<const double>) { return 0.0; };
    t.alpha = 1.0;
    t.holder_const = 1.0;
    t.sup_bound = 1e-12; // declared bound far below the 1e-8 ledger floor
    const TheoryConstants k = theory_constants(t);
    CHECK(std::isfinite(k.c_m));
    CHECK(std::isfinite(k.c_log));
    CHECK(std::isfinite(k.c_mag_tilde));
    CHECK(k.c_mag_tilde > 0.0);
}

TEST_CASE("meta serialization round-trips") {
    const HolderTarget target = make_sin1d();
    const Construction built = assemble(target, {0.3, PouMode::theoretical});
    const json j = meta_to_json(built.meta);
    const ConstructionMeta back = meta_from_json(j);
    CHECK(back.epsilon == built.meta.epsilon);
    CHECK(back.seq_len == built.meta.seq_len);
    CHECK(back.pou_scale == built.meta.pou_scale);
    CHECK(back.attn_scale == built.meta.attn_scale);
    CHECK(back.eta_value == built.meta.eta_value);
    CHECK(back.constants.c_mag_tilde == built.meta.constants.c_mag_tilde);
}

TEST_CASE("constants ledger matches an independent recomputation (d=1, C_H=1, B=1)") {
    HolderTarget t;
    t.name = "unit";
    t.domain = CubeDomain{1};
    t.eval = [](std::span<const double> x) { return std::sin(2.0 * kPi * x[0]) / (2.0 * kPi); };
    t.alpha = 1.0;
    t.holder_const = 1.0;
    t.sup_bound = 1.0;
    const TheoryConstants k = theory_constants(t);

    // Second, test-local evaluation of the same closed forms.
    const double d = 1.0, a = 1.0, ch = 1.0, b = 1.0;
    const double c_p = std::pow(d, d / 2.0) * std::pow(8.0 * ch, d / a);
    const double c_m =
        std::pow(8.0 * ch, 2.0 / a) / 3.0 *
        (std::log(4.0 * b * std::pow(std::sqrt(d) * std::pow(4.0 * ch, 1.0 / a), d)) +
         (d + a) / a);
    const double c_n = 10.0 * (d + 4.0) * c_p + 9.0 * d * d + 95.0 * d + 236.0;
    const double c_log =
        std::abs(std::log(4.0 * c_p * b * (1.0 + 6.0 * d * c_m))) + (d + 2.0 + a) / a + 2.0;
    const double c_mag = c_p * c_p * c_log / 8.0;
    const double c_b = std::max({3.0 * d * c_m, b, 1.0});
    const double e = std::numbers::e;
    const double c_mag_tilde =
        std::max({1.0 / (1.0 - 1.0 / (e * b)), c_mag, 2.0 * (1.0 + 1.0 / (2.0 * e * b)) * c_b});

    CHECK(k.c_p == doctest::Approx(c_p).epsilon(1e-14));
    CHECK(k.c_m == doctest::Approx(c_m).epsilon(1e-14));
    CHECK(k.c_n == doctest::Approx(c_n).epsilon(1e-14));
    CHECK(k.c_log == doctest::Approx(c_log).epsilon(1e-14));
    CHECK(k.c_mag == doctest::Approx(c_mag).epsilon(1e-14));
    CHECK(k.c_b == doctest::Approx(c_b).epsilon(1e-14));
    CHECK(k.c_mag_tilde == doctest::Approx(c_mag_tilde).epsilon(1e-14));

    // Spot values for this configuration: C_P = 8, C_B = 3 C_M.
    CHECK(k.c_p == 8.0);
    CHECK(k.c_b == doctest::Approx(3.0 * k.c_m).epsilon(1e-14));
}
