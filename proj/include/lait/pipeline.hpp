#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lait/cache.hpp"
#include "lait/encoder.hpp"
#include "lait/errors.hpp"
#include "lait/mask.hpp"
#include "lait/tokenizer.hpp"

namespace lait {

// A multi-segment input after templating and tokenization: n token-id
// sequences s_1..s_n, each ending in EOS when produced by the tokenizer.
struct SegmentedExample {
    std::vector<std::vector<uint32_t>> segments;
    std::vector<std::string> segment_texts;
    std::string task_id;
    std::optional<std::string> label;

    void validate() const {
        if (segments.empty()) throw InputError("example has no segments");
        for (const auto& s : segments)
            if (s.empty()) throw InputError("example has an empty segment");
    }

    size_t total_tokens() const {
        size_t m = 0;
        for (const auto& s : segments) m += s.size();
        return m;
    }
};

inline std::vector<size_t> segment_lengths(const SegmentedExample& ex) {
    std::vector<size_t> lens;
    lens.reserve(ex.segments.size());
    for (const auto& s : ex.segments) lens.push_back(s.size());
    return lens;
}

struct EncodeStats {
    uint64_t cache_hits = 0;
    uint64_t cache_misses = 0;
};

namespace detail {

template <typename T>
void check_runnable(const ModelWeights<T>& weights, const ModelConfig& cfg) {
    cfg.validate();
    if (!weights.config.weights_compatible(cfg))
        throw ConfigError("weights were built for a different architecture");
    if (weights.layers.size() != cfg.layers)
        throw ConfigError("weights hold " + std::to_string(weights.layers.size()) +
                          " layers, config expects " + std::to_string(cfg.layers));
}

}  // namespace detail

// Step (a) of LAIT for one segment: embed and run layers [0, P) over the
// segment alone with local positions. Depends only on the segment tokens,
// the weights and P, which is exactly what makes the result cacheable.
template <typename T>
Matrix<T> parallel_representation(const std::vector<uint32_t>& segment,
                                  const ModelWeights<T>& weights, const ModelConfig& cfg,
                                  uint64_t* pair_counter = nullptr) {
    const auto positions = iota_positions(segment.size());
    Matrix<T> x = embed(segment, positions, weights, cfg);
    const AttentionMask mask = AttentionMask::full_mask(segment.size());
    return run_layers(x, mask, positions, weights, 0, cfg.parallel, cfg, pair_counter);
}

// LAIT encoding, separate-then-concatenate route:
//   Enc_{L-P}([Enc_P(s_1); ...; Enc_P(s_n)])
// Each segment runs layers [0, P) independently (served from the cache when
// one is supplied), the concatenation then runs layers [P, L) under a full
// mask with global positions. A cached representation is the stored layer-P
// output, bit for bit, so caching never changes results.
template <typename T>
Matrix<T> lait_encode(const SegmentedExample& ex, const ModelWeights<T>& weights,
                      const ModelConfig& cfg, RepCache<T>* cache = nullptr,
                      uint64_t* pair_counter = nullptr, EncodeStats* stats = nullptr) {
    detail::check_runnable(weights, cfg);
    ex.validate();

    const size_t m = ex.total_tokens();
    Matrix<T> concat(m, cfg.d_model);
    size_t row = 0;
    for (const auto& segment : ex.segments) {
        Matrix<T> rep;
        if (cache && cfg.parallel > 0) {
            const CacheKey key = cache_key(weights.fingerprint, cfg.parallel, segment);
            if (auto hit = cache->get(key, &segment)) {
                rep = *hit;
                if (stats) stats->cache_hits++;
            } else {
                rep = parallel_representation(segment, weights, cfg, pair_counter);
                cache->put(key, Matrix<T>(rep), &segment);
                if (stats) stats->cache_misses++;
            }
        } else {
            rep = parallel_representation(segment, weights, cfg, pair_counter);
        }
        if (rep.rows != segment.size() || rep.cols != cfg.d_model)
            throw ShapeError("segment representation has unexpected shape");
        std::copy(rep.data.begin(), rep.data.end(), concat.data.begin() + row * cfg.d_model);
        row += rep.rows;
    }

    if (cfg.parallel == cfg.layers) return concat;
    const AttentionMask full = AttentionMask::full_mask(m);
    return run_layers(concat, full, iota_positions(m), weights, cfg.parallel, cfg.layers, cfg,
                      pair_counter);
}

// The same computation as a single pass over the concatenation with a
// per-layer mask schedule: block-diagonal with segment-local positions for
// layers [0, P), full with global positions after. Kept as an independent
// route for verification; it must agree with lait_encode exactly.
template <typename T>
Matrix<T> lait_encode_fused(const SegmentedExample& ex, const ModelWeights<T>& weights,
                            const ModelConfig& cfg, uint64_t* pair_counter = nullptr) {
    detail::check_runnable(weights, cfg);
    ex.validate();

    std::vector<uint32_t> tokens;
    std::vector<int64_t> local_positions;
    for (const auto& segment : ex.segments) {
        for (size_t i = 0; i < segment.size(); ++i) {
            tokens.push_back(segment[i]);
            local_positions.push_back(static_cast<int64_t>(i));
        }
    }

    Matrix<T> x = embed(tokens, local_positions, weights, cfg);
    const AttentionMask block = build_block_mask(segment_lengths(ex));
    x = run_layers(x, block, local_positions, weights, 0, cfg.parallel, cfg, pair_counter);
    const AttentionMask full = AttentionMask::full_mask(tokens.size());
    return run_layers(x, full, iota_positions(tokens.size()), weights, cfg.parallel, cfg.layers,
                      cfg, pair_counter);
}

// Mean-pool over tokens, linear projection, argmax with ties broken by the
// lowest label index.
template <typename T>
std::pair<size_t, std::vector<T>> classify(const Matrix<T>& reps, const ClassifierHead<T>& head) {
    if (head.n_labels() == 0) throw ConfigError("classify: model has no classification head");
    if (reps.rows == 0) throw ShapeError("classify: no token representations");
    if (reps.cols != head.w.rows)
        throw ShapeError("classify: representation width " + std::to_string(reps.cols) +
                         " != head input " + std::to_string(head.w.rows));
    std::vector<T> pooled(reps.cols, T(0));
    for (size_t i = 0; i < reps.rows; ++i) {
        const T* r = reps.row(i);
        for (size_t j = 0; j < reps.cols; ++j) pooled[j] += r[j];
    }
    for (T& v : pooled) v /= static_cast<T>(reps.rows);

    std::vector<T> logits(head.n_labels());
    for (size_t j = 0; j < head.n_labels(); ++j) {
        T acc = head.b[j];
        for (size_t c = 0; c < reps.cols; ++c) acc += pooled[c] * head.w(c, j);
        logits[j] = acc;
    }
    size_t best = 0;
    for (size_t j = 1; j < logits.size(); ++j)
        if (logits[j] > logits[best]) best = j;
    return {best, logits};
}

// Templated construction from raw fields: render segment strings, tokenize
// each into ids.
SegmentedExample make_example(const std::string& task_id,
                              const std::map<std::string, std::string>& fields,
                              const std::optional<std::string>& label, const ModelConfig& cfg);

// "raw" task: fields are already-split segment texts.
SegmentedExample make_raw_example(const std::vector<std::string>& segment_texts,
                                  const std::optional<std::string>& label, const ModelConfig& cfg);

}  // namespace lait
