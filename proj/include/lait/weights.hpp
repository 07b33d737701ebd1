#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lait/bytes.hpp"
#include "lait/config.hpp"
#include "lait/errors.hpp"
#include "lait/fnv.hpp"
#include "lait/matrix.hpp"
#include "lait/rng.hpp"

namespace lait {

// One encoder layer, T5 convention: no bias vectors anywhere.
template <typename T>
struct LayerWeights {
    Matrix<T> wq, wk, wv, wo;      // d_model x d_model
    Matrix<T> w1;                  // d_model x d_ff
    Matrix<T> w2;                  // d_ff x d_model
    std::vector<T> gain_attn;      // RMS-norm gain before attention
    std::vector<T> gain_ff;        // RMS-norm gain before feed-forward
    Matrix<T> rel_bias;            // rel_buckets x n_heads; empty unless relative-bucket
};

// Mean-pool-over-tokens linear classifier replacing the decoder stack.
template <typename T>
struct ClassifierHead {
    Matrix<T> w;       // d_model x n_labels
    std::vector<T> b;  // n_labels

    size_t n_labels() const { return b.size(); }
};

template <typename T>
struct ModelWeights {
    ModelConfig config;
    Matrix<T> embedding;  // vocab_size x d_model
    std::vector<LayerWeights<T>> layers;
    ClassifierHead<T> head;  // n_labels == 0 when the model has no head
    uint64_t fingerprint = 0;

    void refresh_fingerprint();
};

namespace detail {

// The file payload is always 32-bit floats, whatever the working precision.
template <typename T>
void write_tensor(ByteWriter& w, const std::vector<T>& v) {
    for (T x : v) w.f32(static_cast<float>(x));
}
template <typename T>
void write_tensor(ByteWriter& w, const Matrix<T>& m) {
    write_tensor(w, m.data);
}

template <typename T>
void hash_tensor(Fnv1a& h, const std::vector<T>& v) {
    for (T x : v) {
        float f = static_cast<float>(x);
        uint32_t u;
        std::memcpy(&u, &f, 4);
        h.update_u32le(u);
    }
}
template <typename T>
void hash_tensor(Fnv1a& h, const Matrix<T>& m) {
    hash_tensor(h, m.data);
}

template <typename T, typename Fn>
void for_each_tensor(ModelWeights<T>& w, Fn&& fn) {
    fn(w.embedding.data);
    for (auto& lw : w.layers) {
        fn(lw.wq.data);
        fn(lw.wk.data);
        fn(lw.wv.data);
        fn(lw.wo.data);
        fn(lw.w1.data);
        fn(lw.w2.data);
        fn(lw.gain_attn);
        fn(lw.gain_ff);
        if (lw.rel_bias.rows) fn(lw.rel_bias.data);
    }
    if (w.head.n_labels()) {
        fn(w.head.w.data);
        fn(w.head.b);
    }
}

inline void write_config(ByteWriter& w, const ModelConfig& c) {
    w.u32(c.layers);
    w.u32(c.parallel);
    w.u32(c.d_model);
    w.u32(c.n_heads);
    w.u32(c.d_head);
    w.u32(c.d_ff);
    w.u32(c.vocab_size);
    w.u32(static_cast<uint32_t>(c.pos_scheme));
    w.u32(c.rel_buckets);
    w.u32(c.rel_max_distance);
}

}  // namespace detail

inline constexpr char kWeightsMagic[5] = {'L', 'A', 'I', 'T', 'W'};
inline constexpr uint32_t kWeightsVersion = 1;

// Fingerprint = FNV-1a over the serialized file bytes after the magic:
// version, config words, then every tensor as little-endian f32.
template <typename T>
void ModelWeights<T>::refresh_fingerprint() {
    ByteWriter header;
    header.u32(kWeightsVersion);
    detail::write_config(header, config);
    Fnv1a h;
    h.update(header.bytes.data(), header.bytes.size());
    detail::for_each_tensor(*this, [&h](auto& tensor) { detail::hash_tensor(h, tensor); });
    fingerprint = h.digest();
}

// Seeded deterministic initialization: Glorot-uniform projections and
// embeddings, all-ones gains, zero relative-bias tables. The head starts at
// zero so a fresh model emits uniform class probabilities (loss ln k).
template <typename T>
ModelWeights<T> init_weights(const ModelConfig& cfg, uint64_t seed, size_t n_labels = 0) {
    cfg.validate();
    Rng rng(seed);
    ModelWeights<T> w;
    w.config = cfg;
    w.embedding = glorot_uniform<T>(cfg.vocab_size, cfg.d_model, rng);
    w.layers.resize(cfg.layers);
    for (auto& lw : w.layers) {
        lw.wq = glorot_uniform<T>(cfg.d_model, cfg.d_model, rng);
        lw.wk = glorot_uniform<T>(cfg.d_model, cfg.d_model, rng);
        lw.wv = glorot_uniform<T>(cfg.d_model, cfg.d_model, rng);
        lw.wo = glorot_uniform<T>(cfg.d_model, cfg.d_model, rng);
        lw.w1 = glorot_uniform<T>(cfg.d_model, cfg.d_ff, rng);
        lw.w2 = glorot_uniform<T>(cfg.d_ff, cfg.d_model, rng);
        lw.gain_attn.assign(cfg.d_model, T(1));
        lw.gain_ff.assign(cfg.d_model, T(1));
        if (cfg.pos_scheme == PosScheme::relative_bucket)
            lw.rel_bias = Matrix<T>(cfg.rel_buckets, cfg.n_heads);
    }
    if (n_labels) {
        w.head.w = Matrix<T>(cfg.d_model, n_labels);
        w.head.b.assign(n_labels, T(0));
    }
    w.refresh_fingerprint();
    return w;
}

template <typename T>
std::vector<uint8_t> serialize_weights(const ModelWeights<T>& w) {
    ByteWriter out;
    out.raw(kWeightsMagic, 5);
    out.u32(kWeightsVersion);
    detail::write_config(out, w.config);
    detail::for_each_tensor(const_cast<ModelWeights<T>&>(w),
                            [&out](auto& tensor) { detail::write_tensor(out, tensor); });
    return out.bytes;
}

template <typename T>
ModelWeights<T> parse_weights(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes.data(), bytes.size(), "weights");
    char magic[5];
    r.raw(magic, 5);
    if (std::memcmp(magic, kWeightsMagic, 5) != 0) throw FormatError("weights: bad magic");
    uint32_t version = r.u32();
    if (version != kWeightsVersion)
        throw FormatError("weights: unsupported version " + std::to_string(version));

    ModelConfig c;
    c.layers = r.u32();
    c.parallel = r.u32();
    c.d_model = r.u32();
    c.n_heads = r.u32();
    c.d_head = r.u32();
    c.d_ff = r.u32();
    c.vocab_size = r.u32();
    uint32_t scheme = r.u32();
    if (scheme > 2) throw FormatError("weights: bad position scheme " + std::to_string(scheme));
    c.pos_scheme = static_cast<PosScheme>(scheme);
    c.rel_buckets = r.u32();
    c.rel_max_distance = r.u32();
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("weights: invalid config: ") + e.what());
    }
    // a corrupt header must fail loudly rather than drive huge allocations
    constexpr uint32_t kMaxDim = 1u << 24;
    if (c.layers > 4096 || c.d_model > kMaxDim || c.d_ff > kMaxDim || c.vocab_size > kMaxDim ||
        c.rel_buckets > kMaxDim)
        throw FormatError("weights: implausible dimensions");

    ModelWeights<T> w;
    w.config = c;
    auto read_matrix = [&r](size_t rows, size_t cols) {
        Matrix<T> m(rows, cols);
        for (T& v : m.data) v = static_cast<T>(r.f32());
        return m;
    };
    auto read_vector = [&r](size_t n) {
        std::vector<T> v(n);
        for (T& x : v) x = static_cast<T>(r.f32());
        return v;
    };

    w.embedding = read_matrix(c.vocab_size, c.d_model);
    w.layers.resize(c.layers);
    for (auto& lw : w.layers) {
        lw.wq = read_matrix(c.d_model, c.d_model);
        lw.wk = read_matrix(c.d_model, c.d_model);
        lw.wv = read_matrix(c.d_model, c.d_model);
        lw.wo = read_matrix(c.d_model, c.d_model);
        lw.w1 = read_matrix(c.d_model, c.d_ff);
        lw.w2 = read_matrix(c.d_ff, c.d_model);
        lw.gain_attn = read_vector(c.d_model);
        lw.gain_ff = read_vector(c.d_model);
        if (c.pos_scheme == PosScheme::relative_bucket)
            lw.rel_bias = read_matrix(c.rel_buckets, c.n_heads);
    }

    // The head has no config entry; its width is implied by the byte count.
    size_t rest = r.remaining();
    if (rest % 4 != 0) throw FormatError("weights: trailing bytes not float-aligned");
    size_t floats = rest / 4;
    if (floats) {
        if (floats % (c.d_model + 1) != 0)
            throw FormatError("weights: classifier head size mismatch");
        size_t n_labels = floats / (c.d_model + 1);
        w.head.w = read_matrix(c.d_model, n_labels);
        w.head.b = read_vector(n_labels);
    }
    w.refresh_fingerprint();
    return w;
}

}  // namespace lait
