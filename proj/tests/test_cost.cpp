#include <doctest.h>

#include "lait/cost.hpp"
#include "lait/encoder.hpp"
#include "lait/pipeline.hpp"

using namespace lait;

TEST_CASE("attention_ops endpoints and worked case") {
    CostReport p0 = attention_ops({5, 9, 2}, 12, 0);
    CHECK(p0.ratio == 1.0);
    CHECK(p0.ops_parallel == 0);
    CHECK(p0.ops_total == p0.baseline_ops);

    CostReport halves = attention_ops({10, 10}, 12, 12);
    CHECK(halves.ratio == doctest::Approx(0.5));

    // L=12, P=9, lengths [16,31]: the MNLI-style worked case
    CostReport mnli = attention_ops({16, 31}, 12, 9);
    CHECK(mnli.ops_parallel == 10953);
    CHECK(mnli.ops_joint == 6627);
    CHECK(mnli.ops_total == 17580);
    CHECK(mnli.baseline_ops == 26508);
    CHECK(mnli.ratio == doctest::Approx(0.6632).epsilon(1e-4));

    CHECK_THROWS_AS(attention_ops({4, 4}, 3, 5), ConfigError);
    CHECK_THROWS_AS(attention_ops({}, 3, 1), InputError);
    CHECK_THROWS_AS(attention_ops({3, 0}, 3, 1), InputError);
}

TEST_CASE("ops_to_flops uses the reference T5-base head geometry") {
    ModelConfig base;  // 12 heads x 64, the paper's FLOP config
    CHECK(ops_to_flops(0, base) == 0);
    CHECK(ops_to_flops(1, base) == 3072);
    CHECK(ops_to_flops(17580, base) == 54005760ull);
}

TEST_CASE("dataset cost sums per example, not over average lengths") {
    std::vector<LengthRecord> singles = {{{7}, 1, {}}, {{12}, 1, {}}, {{3}, 4, {}}};
    for (uint32_t p = 0; p <= 4; ++p) CHECK(dataset_cost(singles, 4, p) == 1.0);

    std::vector<LengthRecord> equal_pairs = {{{10, 10}, 1, {}}, {{10, 10}, 1, {}}};
    CHECK(dataset_cost(equal_pairs, 12, 12) == doctest::Approx(0.5));

    std::vector<LengthRecord> mixed = {{{4, 4}, 1, {}}, {{2, 6}, 1, {}}};
    CHECK(dataset_cost(mixed, 4, 4) == doctest::Approx(0.5625));
}

TEST_CASE("cached dataset cost: Cartesian claim-passage workload") {
    // 17 claims of length 16 evaluated against 100 passages of length 31.
    std::vector<LengthRecord> records;
    for (uint64_t c = 0; c < 17; ++c)
        for (uint64_t p = 0; p < 100; ++p)
            records.push_back({{16, 31}, 1, {1000 + c, 2000 + p}});

    DatasetCost full = dataset_ops(records, 12, 9);
    CHECK(full.ops_total == 29886000ull);

    DatasetCost cached = cached_dataset_ops(records, 12, 9);
    CHECK(cached.ops_total == 12169968ull);
    CHECK(cached.baseline_ops == full.baseline_ops);
    CHECK(static_cast<double>(cached.ops_total) / static_cast<double>(full.ops_total) ==
          doctest::Approx(0.407).epsilon(1e-3));
}

TEST_CASE("cached cost equals full cost when all segments are unique") {
    std::vector<LengthRecord> records = {{{4, 6}, 1, {1, 2}}, {{5, 5}, 1, {3, 4}}};
    for (uint32_t p = 0; p <= 3; ++p)
        CHECK(cached_dataset_cost(records, 3, p) == doctest::Approx(dataset_cost(records, 3, p)));
}

TEST_CASE("multiplicity doubles joint cost but not cached parallel cost") {
    std::vector<LengthRecord> once = {{{4, 6}, 1, {1, 2}}, {{3, 3}, 1, {5, 6}}};
    std::vector<LengthRecord> twice = {{{4, 6}, 2, {1, 2}}, {{3, 3}, 2, {5, 6}}};
    DatasetCost a = cached_dataset_ops(once, 6, 4);
    DatasetCost b = cached_dataset_ops(twice, 6, 4);
    const uint64_t joint_once = 2ull * (10 * 10 + 6 * 6);
    CHECK(a.ops_total == 4ull * (16 + 36 + 9 + 9) + joint_once);
    CHECK(b.ops_total == 4ull * (16 + 36 + 9 + 9) + 2 * joint_once);
    CHECK(b.baseline_ops == 2 * a.baseline_ops);
}

TEST_CASE("cached cost requires digests") {
    std::vector<LengthRecord> records = {{{4, 6}, 1, {}}};
    CHECK_THROWS_AS(cached_dataset_cost(records, 3, 1), InputError);
}

TEST_CASE("ops_total strictly decreases in P for multi-segment inputs") {
    const std::vector<std::vector<uint64_t>> profiles = {
        {2, 2}, {16, 31}, {1, 1, 1}, {9, 40}, {5, 5, 5, 5}, {1, 30}};
    for (const auto& lengths : profiles) {
        uint64_t prev = attention_ops(lengths, 8, 0).ops_total;
        for (uint32_t p = 1; p <= 8; ++p) {
            uint64_t cur = attention_ops(lengths, 8, p).ops_total;
            CHECK(cur < prev);
            prev = cur;
        }
    }
    // degenerate single segment: ratio pinned at 1
    for (uint32_t p = 0; p <= 8; ++p) CHECK(attention_ops({23}, 8, p).ratio == 1.0);
}

TEST_CASE("instrumented counter agrees with attention_ops across random cases") {
    Rng rng(4242);
    for (int t = 0; t < 30; ++t) {
        ModelConfig cfg;
        cfg.layers = 1 + static_cast<uint32_t>(rng.below(4));
        cfg.parallel = static_cast<uint32_t>(rng.below(cfg.layers + 1));
        cfg.d_model = 8;
        cfg.n_heads = 2;
        cfg.d_head = 4;
        cfg.d_ff = 16;
        cfg.vocab_size = 32;
        ModelWeights<float> w = init_weights<float>(cfg, 9000 + static_cast<uint64_t>(t));

        SegmentedExample ex;
        ex.task_id = "raw";
        const size_t n = 1 + rng.below(4);
        std::vector<uint64_t> lengths;
        for (size_t s = 0; s < n; ++s) {
            const size_t len = 1 + rng.below(5);
            lengths.push_back(len);
            std::vector<uint32_t> seg;
            for (size_t i = 0; i < len; ++i)
                seg.push_back(2 + static_cast<uint32_t>(rng.below(30)));
            ex.segments.push_back(std::move(seg));
        }

        uint64_t measured = 0;
        lait_encode(ex, w, cfg, static_cast<RepCache<float>*>(nullptr), &measured, nullptr);
        CHECK(measured == attention_ops(lengths, cfg.layers, cfg.parallel).ops_total);

        uint64_t fused_measured = 0;
        lait_encode_fused(ex, w, cfg, &fused_measured);
        CHECK(fused_measured == measured);
    }
}
