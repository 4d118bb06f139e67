#include "softpou/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace softpou {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument("TransformerParams: " + msg);
}

} // namespace

void TransformerParams::validate() const {
    require(input_dim >= 1 && embed_dim >= 1 && seq_len >= 1, "degenerate dimensions");
    require(embed_w.rows() == embed_dim && embed_w.cols() == input_dim, "embedding shape");
    require(embed_b.size() == embed_dim, "embedding bias length");
    require(positional.rows() == embed_dim && positional.cols() == seq_len,
            "positional encoding shape");
    require(readout.size() == embed_dim * seq_len, "readout length");
    require(!blocks.empty(), "at least one encoder block required");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const EncoderBlock& b = blocks[i];
        const std::string tag = "block " + std::to_string(i) + ": ";
        require(!b.heads.empty(), tag + "no heads");
        for (const AttentionHead& h : b.heads) {
            require(h.query.rows() == b.key_dim && h.query.cols() == embed_dim,
                    tag + "query shape");
            require(h.key.rows() == b.key_dim && h.key.cols() == embed_dim, tag + "key shape");
            require(h.value.rows() == b.value_dim && h.value.cols() == embed_dim,
                    tag + "value shape");
        }
        require(b.out_proj.rows() == embed_dim &&
                    b.out_proj.cols() == b.heads.size() * b.value_dim,
                tag + "out_proj shape");
        const std::size_t d_ff = b.ffn.w1.rows();
        require(b.ffn.w1.cols() == embed_dim, tag + "ffn w1 shape");
        require(b.ffn.b1.size() == d_ff, tag + "ffn b1 length");
        require(b.ffn.w2.rows() == embed_dim && b.ffn.w2.cols() == d_ff, tag + "ffn w2 shape");
        require(b.ffn.b2.size() == embed_dim, tag + "ffn b2 length");
    }
}

Matrix preprocess(const TransformerParams& params, std::span<const double> x) {
    if (x.size() != params.input_dim)
        throw std::invalid_argument("preprocess: input dimension mismatch");
    Matrix z0 = params.positional;
    // Column 1 additionally receives W_E x + b_E.
    for (std::size_t r = 0; r < params.embed_dim; ++r) {
        double acc = params.embed_b[r];
        for (std::size_t c = 0; c < params.input_dim; ++c) {
            const double w = params.embed_w(r, c);
            if (w != 0.0) acc += w * x[c];
        }
        z0(r, 0) += acc;
    }
    return z0;
}

Matrix mha_forward(const EncoderBlock& block, const Matrix& z, BlockTrace* trace,
                   bool trace_attention) {
    const std::size_t p = z.cols();
    const std::size_t dv = block.value_dim;
    Matrix concat(block.heads.size() * dv, p);
    for (std::size_t h = 0; h < block.heads.size(); ++h) {
        const AttentionHead& head = block.heads[h];
        const Matrix qz = matmul(head.query, z); // d_k x P
        const Matrix kz = matmul(head.key, z);   // d_k x P
        Matrix scores = matmul(kz.transposed(), qz); // P x P, scores(k, j)
        if (trace && trace_attention) trace->scores.push_back(scores);
        stable_softmax_columns(scores);
        if (trace && trace_attention) trace->attention.push_back(scores);
        const Matrix vz = matmul(head.value, z);     // d_v x P
        const Matrix out = matmul(vz, scores);       // d_v x P
        for (std::size_t r = 0; r < dv; ++r)
            for (std::size_t c = 0; c < p; ++c) concat(h * dv + r, c) = out(r, c);
    }
    return matmul(block.out_proj, concat);
}

Matrix ffn_forward(const FeedForward& ffn, const Matrix& z) {
    Matrix hidden = matmul(ffn.w1, z);
    for (std::size_t r = 0; r < hidden.rows(); ++r) {
        const double b = ffn.b1[r];
        for (std::size_t c = 0; c < hidden.cols(); ++c) {
            const double v = hidden(r, c) + b;
            hidden(r, c) = v > 0.0 ? v : 0.0;
        }
    }
    Matrix out = matmul(ffn.w2, hidden);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        const double b = ffn.b2[r];
        if (b == 0.0) continue;
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b;
    }
    return out;
}

double forward(const TransformerParams& params, std::span<const double> x,
               ActivationTrace* trace, bool trace_attention) {
    params.validate();
    if (x.size() != params.input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    check_finite(x, "forward input");
    Matrix z = preprocess(params, x);
    if (trace) {
        trace->z0 = z;
        trace->blocks.clear();
    }
    for (const EncoderBlock& block : params.blocks) {
        BlockTrace* bt = nullptr;
        if (trace) {
            trace->blocks.emplace_back();
            bt = &trace->blocks.back();
        }
        Matrix attn = mha_forward(block, z, bt, trace_attention);
        if (bt) bt->mha_out = attn;
        z = ffn_forward(block.ffn, attn);
        if (bt) bt->ffn_out = z;
    }
    check_finite(z, "forward final state");
    // Readout over the column-major vectorization: index c*D + r.
    double out = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c)
        for (std::size_t r = 0; r < z.rows(); ++r) {
            const double w = params.readout[c * z.rows() + r];
            if (w != 0.0) out += w * z(r, c);
        }
    if (trace) trace->output = out;
    return out;
}

std::size_t count_params(const TransformerParams& params) {
    std::size_t n = params.embed_w.size() + params.embed_b.size() + params.positional.size();
    for (const EncoderBlock& b : params.blocks) {
        for (const AttentionHead& h : b.heads)
            n += h.query.size() + h.key.size() + h.value.size();
        n += b.out_proj.size();
        n += b.ffn.w1.size() + b.ffn.b1.size() + b.ffn.w2.size() + b.ffn.b2.size();
    }
    n += params.readout.size();
    return n;
}

double max_magnitude(const TransformerParams& params) {
    double m = 0.0;
    auto scan = [&m](std::span<const double> v) {
        for (double x : v) m = std::max(m, std::abs(x));
    };
    auto scan_m = [&scan](const Matrix& mat) {
        scan(std::span<const double>(mat.data(), mat.size()));
    };
    scan_m(params.embed_w);
    scan(params.embed_b);
    scan_m(params.positional);
    for (const EncoderBlock& b : params.blocks) {
        for (const AttentionHead& h : b.heads) {
            scan_m(h.query);
            scan_m(h.key);
            scan_m(h.value);
        }
        scan_m(b.out_proj);
        scan_m(b.ffn.w1);
        scan(b.ffn.b1);
        scan_m(b.ffn.w2);
        scan(b.ffn.b2);
    }
    scan(params.readout);
    return m;
}

} // namespace softpou
