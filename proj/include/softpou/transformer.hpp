#ifndef SOFTPOU_TRANSFORMER_HPP
#define SOFTPOU_TRANSFORMER_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "softpou/numeric.hpp"

namespace softpou {

struct AttentionHead {
    Matrix query; // d_k x D
    Matrix key;   // d_k x D
    Matrix value; // d_v x D
};

struct FeedForward {
    Matrix w1; // d_ff x D
    Vector b1; // d_ff
    Matrix w2; // D x d_ff
    Vector b2; // D
};

struct EncoderBlock {
    std::vector<AttentionHead> heads;
    std::size_t key_dim = 1;   // d_k, uniform within the block
    std::size_t value_dim = 1; // d_v
    Matrix out_proj;           // D x (H * d_v)
    FeedForward ffn;
};

// Complete weight set: embedding, positional encoding, encoder blocks and the
// linear readout over the column-major vectorization of the final state.
// No attention scaling by sqrt(d_k), no residual connections, no layer norm.
struct TransformerParams {
    std::size_t input_dim = 1; // d
    std::size_t embed_dim = 1; // D
    std::size_t seq_len = 1;   // P
    Matrix embed_w;            // D x d
    Vector embed_b;            // D
    Matrix positional;         // D x P
    std::vector<EncoderBlock> blocks;
    Vector readout;            // D * P

    std::size_t depth() const { return blocks.size(); }
    void validate() const; // throws on any shape inconsistency
};

struct BlockTrace {
    std::vector<Matrix> scores;    // per head, P x P (only when attention traced)
    std::vector<Matrix> attention; // per head, P x P, columns sum to 1
    Matrix mha_out;                // D x P
    Matrix ffn_out;                // D x P
};

struct ActivationTrace {
    Matrix z0;
    std::vector<BlockTrace> blocks;
    double output = 0.0;
};

// Z0 = (W_E x + b_E) e_1^T + PE.
Matrix preprocess(const TransformerParams& params, std::span<const double> x);

// Scores E^h = (K Z)^T (Q Z), column-wise stable softmax, heads concatenated
// then projected. trace may be null; score/attention matrices are stored only
// when trace_attention is set.
Matrix mha_forward(const EncoderBlock& block, const Matrix& z, BlockTrace* trace = nullptr,
                   bool trace_attention = false);

// Column-wise W2 * relu(W1 z + b1) + b2.
Matrix ffn_forward(const FeedForward& ffn, const Matrix& z);

double forward(const TransformerParams& params, std::span<const double> x,
               ActivationTrace* trace = nullptr, bool trace_attention = false);

// Number of stored parameter entries, summed tensor by tensor.
std::size_t count_params(const TransformerParams& params);

// Max absolute entry over all parameter tensors.
double max_magnitude(const TransformerParams& params);

} // namespace softpou

#endif
