#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lait/config.hpp"
#include "lait/errors.hpp"
#include "lait/mask.hpp"
#include "lait/matrix.hpp"
#include "lait/weights.hpp"

namespace lait {

// T5-style bidirectional bucketing of a relative offset (key pos - query
// pos). Buckets [0, rel_buckets/2) cover offset <= 0, the upper half covers
// offset > 0. Per direction: exact buckets while |offset| < rel_buckets/4,
// logarithmic spacing beyond, clipped at max_distance.
inline uint32_t rel_bucket(int64_t offset, uint32_t rel_buckets, uint32_t max_distance) {
    const uint32_t half = rel_buckets / 2;
    const uint32_t max_exact = half / 2;
    uint32_t bucket = 0;
    uint64_t d;
    if (offset > 0) {
        bucket = half;
        d = static_cast<uint64_t>(offset);
    } else {
        d = static_cast<uint64_t>(-offset);
    }
    if (d < max_exact) return bucket + static_cast<uint32_t>(d);
    const double scaled = std::log(static_cast<double>(d) / max_exact) /
                          std::log(static_cast<double>(max_distance) / max_exact) *
                          (half - max_exact);
    uint32_t log_bucket = max_exact + static_cast<uint32_t>(scaled);
    return bucket + std::min(log_bucket, half - 1);
}

// Per-head bias matrices: bias[h](i, j) = table[bucket(k_pos[j] - q_pos[i])][h].
template <typename T>
std::vector<Matrix<T>> relative_position_bias(const std::vector<int64_t>& q_positions,
                                              const std::vector<int64_t>& k_positions,
                                              const Matrix<T>& table, const ModelConfig& cfg) {
    if (table.rows != cfg.rel_buckets || table.cols != cfg.n_heads)
        throw ShapeError("relative_position_bias: table must be rel_buckets x n_heads");
    std::vector<Matrix<T>> bias(cfg.n_heads, Matrix<T>(q_positions.size(), k_positions.size()));
    for (size_t i = 0; i < q_positions.size(); ++i)
        for (size_t j = 0; j < k_positions.size(); ++j) {
            uint32_t b = rel_bucket(k_positions[j] - q_positions[i], cfg.rel_buckets,
                                    cfg.rel_max_distance);
            for (uint32_t h = 0; h < cfg.n_heads; ++h) bias[h](i, j) = table(b, h);
        }
    return bias;
}

// Activations recorded during a forward pass, enough to run the layer
// backward without recomputation.
template <typename T>
struct LayerTrace {
    Matrix<T> x_in;               // layer input
    Matrix<T> u;                  // rms_norm(x_in, gain_attn)
    Matrix<T> q, k, v;            // projections of u
    std::vector<Matrix<T>> attw;  // per-head attention weights, 0 where masked
    Matrix<T> ocat;               // concatenated head outputs, pre-wo
    Matrix<T> y;                  // x_in + attention
    Matrix<T> vn;                 // rms_norm(y, gain_ff)
    Matrix<T> h1;                 // vn * w1, pre-ReLU
};

namespace detail {

// Buckets indexed by offset - min_offset, computed once per call rather than
// per (i, j) pair.
inline std::vector<uint32_t> bucket_lookup(const std::vector<int64_t>& q_pos,
                                           const std::vector<int64_t>& k_pos,
                                           const ModelConfig& cfg, int64_t& min_off) {
    int64_t min_q = q_pos[0], max_q = q_pos[0];
    for (int64_t p : q_pos) {
        min_q = std::min(min_q, p);
        max_q = std::max(max_q, p);
    }
    int64_t min_k = k_pos[0], max_k = k_pos[0];
    for (int64_t p : k_pos) {
        min_k = std::min(min_k, p);
        max_k = std::max(max_k, p);
    }
    min_off = min_k - max_q;
    int64_t max_off = max_k - min_q;
    std::vector<uint32_t> lut(static_cast<size_t>(max_off - min_off + 1));
    for (int64_t o = min_off; o <= max_off; ++o)
        lut[static_cast<size_t>(o - min_off)] =
            rel_bucket(o, cfg.rel_buckets, cfg.rel_max_distance);
    return lut;
}

}  // namespace detail

// Masked multi-head self-attention with optional T5 relative bias.
//
// Disallowed (q, k) pairs are skipped outright: their scores are never
// formed and their weights are exactly zero, which keeps a block-diagonal
// pass bit-identical to encoding each segment alone. The pair counter, when
// supplied, is incremented by the number of allowed pairs (one count per
// pair, heads share it), matching the analytic cost model.
template <typename T>
Matrix<T> multi_head_attention(const Matrix<T>& x, const AttentionMask& mask,
                               const std::vector<int64_t>& positions, const LayerWeights<T>& lw,
                               const ModelConfig& cfg, uint64_t* pair_counter = nullptr,
                               LayerTrace<T>* trace = nullptr) {
    const size_t m = x.rows;
    if (x.cols != cfg.d_model)
        throw ShapeError("attention: input width " + std::to_string(x.cols) + " != d_model");
    if (mask.side != m || positions.size() != m)
        throw ShapeError("attention: rows, mask side and positions length must agree");

    Matrix<T> q = matmul(x, lw.wq);
    Matrix<T> k = matmul(x, lw.wk);
    Matrix<T> v = matmul(x, lw.wv);

    const bool use_bias = cfg.pos_scheme == PosScheme::relative_bucket;
    int64_t min_off = 0;
    std::vector<uint32_t> buckets;
    if (use_bias) {
        if (lw.rel_bias.rows != cfg.rel_buckets || lw.rel_bias.cols != cfg.n_heads)
            throw ShapeError("attention: relative-bias table shape mismatch");
        buckets = detail::bucket_lookup(positions, positions, cfg, min_off);
    }

    const T inv_sqrt_dh = T(1) / std::sqrt(static_cast<T>(cfg.d_head));
    Matrix<T> ocat(m, cfg.d_model);
    std::vector<T> scores(m);
    if (trace) trace->attw.assign(cfg.n_heads, Matrix<T>(m, m));

    for (uint32_t h = 0; h < cfg.n_heads; ++h) {
        const size_t off = static_cast<size_t>(h) * cfg.d_head;
        for (size_t i = 0; i < m; ++i) {
            const auto range = mask.row_range(i);
            const T* qi = q.row(i) + off;
            T mx = -std::numeric_limits<T>::infinity();
            for (size_t j = range.begin; j < range.end; ++j) {
                const T* kj = k.row(j) + off;
                T s = T(0);
                for (uint32_t c = 0; c < cfg.d_head; ++c) s += qi[c] * kj[c];
                s *= inv_sqrt_dh;
                if (use_bias)
                    s += lw.rel_bias(
                        buckets[static_cast<size_t>(positions[j] - positions[i] - min_off)], h);
                scores[j] = s;
                if (s > mx) mx = s;
            }
            if (range.begin == range.end)
                throw MaskedRowError("attention row " + std::to_string(i) + " fully masked");
            T sum = T(0);
            for (size_t j = range.begin; j < range.end; ++j) {
                scores[j] = std::exp(scores[j] - mx);
                sum += scores[j];
            }
            T* out = ocat.row(i) + off;
            for (size_t j = range.begin; j < range.end; ++j) {
                const T w = scores[j] / sum;
                if (trace) trace->attw[h](i, j) = w;
                const T* vj = v.row(j) + off;
                for (uint32_t c = 0; c < cfg.d_head; ++c) out[c] += w * vj[c];
            }
        }
    }
    if (pair_counter) *pair_counter += mask.allowed_pairs();
    if (trace) {
        trace->q = q;
        trace->k = k;
        trace->v = v;
        trace->ocat = ocat;
    }
    return matmul(ocat, lw.wo);
}

// Pre-norm residual block: attention sublayer then ReLU feed-forward.
template <typename T>
Matrix<T> encoder_layer(const Matrix<T>& x, const AttentionMask& mask,
                        const std::vector<int64_t>& positions, const LayerWeights<T>& lw,
                        const ModelConfig& cfg, uint64_t* pair_counter = nullptr,
                        LayerTrace<T>* trace = nullptr) {
    Matrix<T> u = rms_norm(x, lw.gain_attn);
    Matrix<T> a = multi_head_attention(u, mask, positions, lw, cfg, pair_counter, trace);
    Matrix<T> y = add(x, a);
    Matrix<T> vn = rms_norm(y, lw.gain_ff);
    Matrix<T> h1 = matmul(vn, lw.w1);
    Matrix<T> f = matmul(relu(h1), lw.w2);
    Matrix<T> z = add(y, f);
    if (trace) {
        trace->x_in = x;
        trace->u = std::move(u);
        trace->y = std::move(y);
        trace->vn = std::move(vn);
        trace->h1 = std::move(h1);
    }
    return z;
}

// Applies encoder layers [from_layer, to_layer) in order; an empty range is
// the identity. When `traces` is given it receives one entry per layer run.
template <typename T>
Matrix<T> run_layers(const Matrix<T>& x, const AttentionMask& mask,
                     const std::vector<int64_t>& positions, const ModelWeights<T>& weights,
                     size_t from_layer, size_t to_layer, const ModelConfig& cfg,
                     uint64_t* pair_counter = nullptr,
                     std::vector<LayerTrace<T>>* traces = nullptr) {
    if (from_layer > to_layer || to_layer > weights.layers.size())
        throw std::out_of_range("run_layers: bad layer range [" + std::to_string(from_layer) +
                                ", " + std::to_string(to_layer) + ") of " +
                                std::to_string(weights.layers.size()));
    Matrix<T> cur = x;
    for (size_t l = from_layer; l < to_layer; ++l) {
        LayerTrace<T>* t = nullptr;
        if (traces) {
            traces->emplace_back();
            t = &traces->back();
        }
        cur = encoder_layer(cur, mask, positions, weights.layers[l], cfg, pair_counter, t);
    }
    return cur;
}

// Embedding lookup. Sinusoidal encodings, when enabled, use the supplied
// positions, which are always segment-local so that cached representations
// never depend on where a segment lands in a concatenation.
template <typename T>
Matrix<T> embed(const std::vector<uint32_t>& tokens, const std::vector<int64_t>& positions,
                const ModelWeights<T>& weights, const ModelConfig& cfg) {
    if (tokens.size() != positions.size())
        throw ShapeError("embed: tokens and positions length mismatch");
    Matrix<T> out(tokens.size(), cfg.d_model);
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] >= cfg.vocab_size)
            throw ConfigError("token id " + std::to_string(tokens[i]) + " out of vocabulary");
        const T* src = weights.embedding.row(tokens[i]);
        std::copy(src, src + cfg.d_model, out.row(i));
    }
    if (cfg.pos_scheme == PosScheme::sinusoidal_local) {
        for (size_t i = 0; i < tokens.size(); ++i) {
            T* r = out.row(i);
            for (uint32_t c = 0; c + 1 < cfg.d_model; c += 2) {
                const double angle = static_cast<double>(positions[i]) /
                                     std::pow(10000.0, static_cast<double>(c) / cfg.d_model);
                r[c] += static_cast<T>(std::sin(angle));
                r[c + 1] += static_cast<T>(std::cos(angle));
            }
        }
    }
    return out;
}

inline std::vector<int64_t> iota_positions(size_t n) {
    std::vector<int64_t> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = static_cast<int64_t>(i);
    return p;
}

}  // namespace lait
