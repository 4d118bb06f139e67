#ifndef SOFTPOU_CONSTRUCTION_HPP
#define SOFTPOU_CONSTRUCTION_HPP

#include <cstddef>
#include <vector>

#include "softpou/pou.hpp"
#include "softpou/transformer.hpp"

namespace softpou {

// Closed-form constants of the synthesis, evaluated once per target/domain.
struct TheoryConstants {
    double c_p = 0.0;        // sequence-length constant
    double c_m = 0.0;        // POU-scale constant
    double c_n = 0.0;        // parameter-count constant
    double c_log = 0.0;
    double c_mag = 0.0;
    double c_b = 0.0;
    double c_mag_tilde = 0.0;
    double c_manifold = 0.0; // covering-number constant (manifolds; 0 on cubes)
};

struct ConstructionMeta {
    double epsilon = 0.0;
    std::size_t seq_len = 0;      // P
    std::size_t input_dim = 0;    // d (cube) or ambient dim (manifold)
    double pou_scale = 0.0;       // M_g
    double attn_scale = 0.0;      // M
    double gap = 0.0;             // c = 1 - cos(2 pi / P)
    double eta_value = 0.0;       // peak positional attention weight
    double lambda_value = 0.0;    // positional-encoding scale after block-1 MHA
    double feature_bound_t = 0.0; // B_T <= 3 M_g dim
    double feature_bound_r = 0.0; // B_R <= B
    double leak = 0.0;            // e^{-cM}
    double impl_error_bound = 0.0;    // (P-1) B (1 + 6 M_g dim) e^{-cM}
    double seq_len_bound = 0.0;       // C_P eps^{-d/alpha}
    double param_count_bound = 0.0;   // C_N eps^{-d/alpha}
    double magnitude_bound = 0.0;     // C~_mag eps^{-2d/alpha} log(1/eps)
    double pou_scale_bound = 0.0;     // C_M eps^{-2/alpha} log(2/eps)
    TheoryConstants constants;
    PouMode mode = PouMode::theoretical;

    void validate() const;
};

struct Construction {
    TransformerParams params;
    ConstructionMeta meta;
    PouApproximator pou; // the reference estimator realized by the network
};

// c = 1 - cos(2 pi / P), computed as 2 sin^2(pi / P) to avoid cancellation.
double spectral_gap(std::size_t seq_len);

// Peak positional attention weight e^M / sum_l e^{M cos(2 pi l / P)},
// evaluated in the log domain.
double eta(double attn_scale, std::size_t seq_len);

// Positional-encoding scale sum_k e^{M cos t_k} cos t_k / sum_l e^{M cos t_l}.
double lambda_coef(double attn_scale, std::size_t seq_len);

// M = (1/c) log(2 (P-1) B (1 + 6 M_g dim) / eps): makes the implementation
// error bound exactly eps/2.
double choose_attention_scale(double epsilon, std::size_t seq_len, double sup_bound,
                              double pou_scale, std::size_t dim);

// Embedding + positional encoding writing the canonical first-token layout
// [x, 1, 0, sin t_j, cos t_j] with t_j = 2 pi j / P; all entries in [-1, 1].
void synth_preprocessing(TransformerParams& params, std::size_t input_dim,
                         std::size_t seq_len);

// Block-1 MHA: P affine heads (rotation queries, M*I keys, value rows carrying
// 2 M_g c_h and g(c_h)) plus the indicator head and the PE head.
EncoderBlock synth_mha_affine(const std::vector<std::vector<double>>& centers,
                              const std::vector<double>& values, double pou_scale,
                              double attn_scale);

// Block-1 FFN: thresholds the indicator at 2 e^{-cM} and rescales by
// 1/(eta - 2 e^{-cM}) and 1/lambda, restoring exact 0/1 indicator and
// unit-scale positional encodings. Requires (P+1) e^{-cM} < 1.
FeedForward synth_ffn_restore(double attn_scale, std::size_t seq_len, std::size_t input_dim);

// Block-2 MHA: single head, Q = e_{d+2}, K = e_1, V = e_2, out_proj = e_1;
// realizes the softmax POU over the affine features.
EncoderBlock synth_mha_pou(std::size_t input_dim);

// Exact identity FFN (W1 = [I; -I], W2 = [I, -I], zero biases).
FeedForward synth_ffn_identity(std::size_t embed_dim);

Construction assemble(const HolderTarget& target, const PouConfig& cfg);

double implementation_error_bound(const ConstructionMeta& meta);

TheoryConstants theory_constants(const HolderTarget& target);

struct BoundReport {
    double seq_len_measured = 0.0, seq_len_bound = 0.0;
    double params_measured = 0.0, params_bound = 0.0;
    double magnitude_measured = 0.0, magnitude_bound = 0.0;
    double pou_scale_measured = 0.0, pou_scale_bound = 0.0;
    bool pass = false;
};

// Asserts every synthesized quantity against its closed-form bound.
// Calibrated scales are capped by the theoretical ones, so both modes pass.
BoundReport magnitude_bounds(const Construction& built, const HolderTarget& target);

} // namespace softpou

#endif
