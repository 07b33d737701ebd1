#include "lait/verify.hpp"

#include <cmath>
#include <sstream>

#include "lait/cost.hpp"
#include "lait/train.hpp"

namespace lait {

namespace {

ModelConfig random_small_config(Rng& rng, uint32_t min_layers = 2, uint32_t max_layers = 4) {
    ModelConfig cfg;
    cfg.layers = min_layers + static_cast<uint32_t>(rng.below(max_layers - min_layers + 1));
    cfg.parallel = static_cast<uint32_t>(rng.below(cfg.layers + 1));
    cfg.n_heads = 2;
    cfg.d_head = 4 + 4 * static_cast<uint32_t>(rng.below(2));
    cfg.d_model = cfg.n_heads * cfg.d_head;
    cfg.d_ff = 2 * cfg.d_model;
    cfg.vocab_size = 48;
    return cfg;
}

SegmentedExample random_ids_example(Rng& rng, const ModelConfig& cfg, size_t n_segments,
                                    size_t max_len = 6) {
    SegmentedExample ex;
    ex.task_id = "raw";
    for (size_t s = 0; s < n_segments; ++s) {
        std::vector<uint32_t> seg(1 + rng.below(max_len));
        for (auto& t : seg)
            t = kReservedIds + static_cast<uint32_t>(rng.below(cfg.vocab_size - kReservedIds));
        ex.segments.push_back(std::move(seg));
    }
    return ex;
}

template <typename T>
double dual_path_worst(Rng& rng, int cases) {
    double worst = 0;
    for (int t = 0; t < cases; ++t) {
        ModelConfig cfg = random_small_config(rng);
        ModelWeights<T> w = init_weights<T>(cfg, rng.next_u64());
        SegmentedExample ex = random_ids_example(rng, cfg, 1 + rng.below(4));
        Matrix<T> separate = lait_encode(ex, w, cfg);
        Matrix<T> fused = lait_encode_fused(ex, w, cfg);
        worst = std::max(worst, max_abs_diff(separate, fused));
    }
    return worst;
}

CheckResult check_dual_path(Rng& rng) {
    CheckResult r{"dual-path equivalence", false, ""};
    const double worst32 = dual_path_worst<float>(rng, 30);
    const double worst64 = dual_path_worst<double>(rng, 10);
    std::ostringstream os;
    os << "max abs diff f32 " << worst32 << ", f64 " << worst64;
    r.detail = os.str();
    r.passed = worst32 < 1e-5 && worst64 < 1e-10;
    return r;
}

CheckResult check_endpoints(Rng& rng) {
    CheckResult r{"endpoint identities", false, ""};
    bool ok = true;
    for (int t = 0; t < 6 && ok; ++t) {
        ModelConfig cfg = random_small_config(rng);
        SegmentedExample ex = random_ids_example(rng, cfg, 2 + rng.below(2));

        cfg.parallel = 0;  // LAIT-0 vs vanilla full-mask pass
        ModelWeights<float> w = init_weights<float>(cfg, rng.next_u64());
        Matrix<float> lait0 = lait_encode(ex, w, cfg);
        std::vector<uint32_t> tokens;
        std::vector<int64_t> local;
        for (const auto& seg : ex.segments)
            for (size_t i = 0; i < seg.size(); ++i) {
                tokens.push_back(seg[i]);
                local.push_back(static_cast<int64_t>(i));
            }
        Matrix<float> vanilla =
            run_layers(embed(tokens, local, w, cfg), AttentionMask::full_mask(tokens.size()),
                       iota_positions(tokens.size()), w, 0, cfg.layers, cfg);
        ok = ok && bit_identical(lait0, vanilla);

        cfg.parallel = cfg.layers;  // LAIT-L vs independent per-segment encoding
        Matrix<float> laitL = lait_encode(ex, w, cfg);
        size_t row = 0;
        for (const auto& seg : ex.segments) {
            Matrix<float> solo = parallel_representation(seg, w, cfg);
            for (size_t i = 0; i < solo.rows && ok; ++i)
                for (size_t c = 0; c < cfg.d_model; ++c)
                    ok = ok && laitL(row + i, c) == solo(i, c);
            row += seg.size();
        }
    }
    r.passed = ok;
    r.detail = ok ? "bit-identical" : "mismatch";
    return r;
}

CheckResult check_ops_counter(Rng& rng) {
    CheckResult r{"ops-counter agreement", false, ""};
    int agreed = 0;
    const int cases = 200;
    for (int t = 0; t < cases; ++t) {
        ModelConfig cfg = random_small_config(rng);
        ModelWeights<float> w = init_weights<float>(cfg, rng.next_u64());
        SegmentedExample ex = random_ids_example(rng, cfg, 1 + rng.below(4));
        std::vector<uint64_t> lengths;
        for (const auto& s : ex.segments) lengths.push_back(s.size());
        uint64_t measured = 0;
        lait_encode(ex, w, cfg, static_cast<RepCache<float>*>(nullptr), &measured, nullptr);
        if (measured == attention_ops(lengths, cfg.layers, cfg.parallel).ops_total) agreed++;
    }
    std::ostringstream os;
    os << agreed << "/" << cases << " exact";
    r.detail = os.str();
    r.passed = agreed == cases;
    return r;
}

CheckResult check_cache_transparency(Rng& rng) {
    CheckResult r{"cache transparency", false, ""};
    ModelConfig cfg = random_small_config(rng);
    if (cfg.parallel == 0) cfg.parallel = 1;
    ModelWeights<float> w = init_weights<float>(cfg, rng.next_u64());
    RepCache<float> cache(16u << 20);
    bool ok = true;
    uint64_t hits = 0;
    // a small pool of segments so reuse actually happens
    std::vector<std::vector<uint32_t>> pool;
    for (int i = 0; i < 8; ++i) pool.push_back(random_ids_example(rng, cfg, 1).segments[0]);
    for (int t = 0; t < 40 && ok; ++t) {
        SegmentedExample ex;
        ex.task_id = "raw";
        const size_t n = 1 + rng.below(3);
        for (size_t s = 0; s < n; ++s) ex.segments.push_back(pool[rng.below(pool.size())]);
        EncodeStats stats;
        Matrix<float> cached = lait_encode(ex, w, cfg, &cache, nullptr, &stats);
        Matrix<float> plain = lait_encode(ex, w, cfg);
        ok = ok && bit_identical(cached, plain);
        hits += stats.cache_hits;
    }
    std::ostringstream os;
    os << "40 workloads bit-identical, " << hits << " hits";
    r.detail = os.str();
    r.passed = ok && hits > 0;
    return r;
}

CheckResult check_gradients(Rng& rng) {
    CheckResult r{"gradient finite-difference check", false, ""};
    double worst = 0;
    for (uint32_t parallel : {0u, 1u, 2u}) {
        ModelConfig cfg;
        cfg.layers = 2;
        cfg.parallel = parallel;
        cfg.d_model = 8;
        cfg.n_heads = 2;
        cfg.d_head = 4;
        cfg.d_ff = 16;
        cfg.vocab_size = 32;
        ModelWeights<double> w = init_weights<double>(cfg, rng.next_u64(), 2);
        SegmentedExample ex = random_ids_example(rng, cfg, 2, 4);
        ex.label = "a";
        worst = std::max(worst,
                         finite_diff_check(w, ex, {"a", "b"}, cfg, 1e-5, 200, rng.next_u64()));
    }
    std::ostringstream os;
    os << "max rel err " << worst;
    r.detail = os.str();
    r.passed = worst < 1e-4;
    return r;
}

CheckResult check_cost_monotonicity(Rng& rng) {
    CheckResult r{"cost sweep monotonicity", false, ""};
    bool ok = true;
    for (int t = 0; t < 40 && ok; ++t) {
        const uint32_t layers = 2 + static_cast<uint32_t>(rng.below(11));
        const size_t n = 2 + rng.below(3);
        std::vector<uint64_t> lengths;
        for (size_t i = 0; i < n; ++i) lengths.push_back(1 + rng.below(40));
        double prev_ratio = attention_ops(lengths, layers, 0).ratio;
        ok = ok && prev_ratio == 1.0;
        for (uint32_t p = 1; p <= layers && ok; ++p) {
            const double ratio = attention_ops(lengths, layers, p).ratio;
            ok = ok && ratio < prev_ratio;
            prev_ratio = ratio;
        }
    }
    r.passed = ok;
    r.detail = ok ? "ratio 1.0 at P=0, strictly decreasing" : "violation found";
    return r;
}

CheckResult check_serialization(Rng& rng) {
    CheckResult r{"serialization round-trips", false, ""};
    ModelConfig cfg = random_small_config(rng);
    ModelWeights<float> w = init_weights<float>(cfg, rng.next_u64(), 3);
    std::vector<uint8_t> bytes = serialize_weights(w);
    ModelWeights<float> back = parse_weights<float>(bytes);
    bool ok = serialize_weights(back) == bytes && back.fingerprint == w.fingerprint;

    Matrix<float> rep(3, cfg.d_model);
    Rng fill(rng.next_u64());
    for (float& v : rep.data) v = static_cast<float>(fill.uniform(-2, 2));
    CacheEntry<float> entry(cache_key(w.fingerprint, 1, {5, 6, 7}), std::move(rep));
    std::vector<uint8_t> ebytes = serialize_entry(entry);
    CacheEntry<float> eback = deserialize_entry(ebytes);
    ok = ok && eback.key == entry.key && bit_identical(*eback.rep, *entry.rep);

    bool structured_errors = true;
    std::vector<uint8_t> bad = bytes;
    bad[0] ^= 0xff;
    try {
        parse_weights<float>(bad);
        structured_errors = false;
    } catch (const FormatError&) {
    }
    std::vector<uint8_t> ebad = ebytes;
    ebad[2] ^= 0xff;
    try {
        deserialize_entry(ebad);
        structured_errors = false;
    } catch (const FormatError&) {
    }

    r.passed = ok && structured_errors;
    r.detail = r.passed ? "bit-exact, corrupt headers rejected" : "round-trip failure";
    return r;
}

}  // namespace

std::vector<CheckResult> run_verification(uint64_t seed) {
    Rng rng(seed);
    std::vector<CheckResult> results;
    results.push_back(check_dual_path(rng));
    results.push_back(check_endpoints(rng));
    results.push_back(check_ops_counter(rng));
    results.push_back(check_cache_transparency(rng));
    results.push_back(check_gradients(rng));
    results.push_back(check_cost_monotonicity(rng));
    results.push_back(check_serialization(rng));
    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

}  // namespace lait
