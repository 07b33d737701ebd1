#include <doctest.h>

#include <cmath>
#include <set>

#include "lait/train.hpp"

using namespace lait;

namespace {

ModelConfig grad_config(uint32_t layers, uint32_t parallel, uint32_t d_model = 16,
                        uint32_t d_ff = 24) {
    ModelConfig cfg;
    cfg.layers = layers;
    cfg.parallel = parallel;
    cfg.d_model = d_model;
    cfg.n_heads = 2;
    cfg.d_head = d_model / 2;
    cfg.d_ff = d_ff;
    cfg.vocab_size = 32;
    return cfg;
}

SegmentedExample labeled_example(Rng& rng, const ModelConfig& cfg, size_t n_segments,
                                 const std::string& label) {
    SegmentedExample ex;
    ex.task_id = "raw";
    ex.label = label;
    for (size_t s = 0; s < n_segments; ++s) {
        std::vector<uint32_t> seg(2 + rng.below(4));
        for (auto& t : seg)
            t = kReservedIds + static_cast<uint32_t>(rng.below(cfg.vocab_size - kReservedIds));
        ex.segments.push_back(std::move(seg));
    }
    return ex;
}

}  // namespace

TEST_CASE("gen_synthetic: determinism, balance, seq_len=2 swap") {
    SyntheticTaskSpec spec;
    spec.seq_len = 2;
    spec.vocab = 30;
    spec.n_train = 40;
    spec.n_eval = 20;
    spec.seed = 77;

    SyntheticData a = gen_synthetic(spec);
    SyntheticData b = gen_synthetic(spec);
    REQUIRE(a.train.size() == 40);
    REQUIRE(a.eval.size() == 20);
    for (size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].segments == b.train[i].segments);
        CHECK(a.train[i].label == b.train[i].label);
    }

    size_t same = 0;
    for (const auto& ex : a.train) {
        REQUIRE(ex.segments.size() == 2);
        if (*ex.label == "same") {
            same++;
            CHECK(ex.segments[0] == ex.segments[1]);
        } else {
            // the only non-identity permutation of two tokens is the swap
            CHECK(ex.segments[1][0] == ex.segments[0][1]);
            CHECK(ex.segments[1][1] == ex.segments[0][0]);
            CHECK(ex.segments[0] != ex.segments[1]);
        }
    }
    CHECK(same == 20);
}

TEST_CASE("gen_synthetic: shared_token labels match set intersection") {
    SyntheticTaskSpec spec;
    spec.kind = SyntheticTaskSpec::Kind::shared_token;
    spec.seq_len = 5;
    spec.vocab = 40;
    spec.n_train = 60;
    spec.n_eval = 0;
    spec.seed = 5;
    SyntheticData data = gen_synthetic(spec);
    for (const auto& ex : data.train) {
        std::set<uint32_t> s1(ex.segments[0].begin(), ex.segments[0].end());
        bool shares = false;
        for (uint32_t t : ex.segments[1]) shares = shares || s1.count(t) > 0;
        CHECK(shares == (*ex.label == "yes"));
    }
}

TEST_CASE("gen_synthetic rejects degenerate specs") {
    SyntheticTaskSpec spec;
    spec.seq_len = 1;
    CHECK_THROWS_AS(gen_synthetic(spec), ConfigError);
    spec.seq_len = 8;
    spec.kind = SyntheticTaskSpec::Kind::shared_token;
    spec.vocab = 10;
    CHECK_THROWS_AS(gen_synthetic(spec), ConfigError);
}

TEST_CASE("uniform logits give ln k loss; balanced batch zeroes the bias gradient") {
    ModelConfig cfg = grad_config(2, 1);
    ModelWeights<double> w = init_weights<double>(cfg, 11, 2);
    std::fill(w.head.w.data.begin(), w.head.w.data.end(), 0.0);
    std::fill(w.head.b.begin(), w.head.b.end(), 0.0);
    const std::vector<std::string> labels = {"a", "b"};

    Rng rng(12);
    Gradients<double> grads = Gradients<double>::zeros_like(w);
    double loss = 0;
    for (int i = 0; i < 8; ++i) {
        SegmentedExample ex = labeled_example(rng, cfg, 2, i % 2 ? "a" : "b");
        loss += accumulate_loss_and_grads(w, ex, labels, cfg, grads);
    }
    CHECK(loss / 8 == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    // mean gradient of b is (p - y) averaged: zero when classes balance
    CHECK(std::abs(grads.head_b[0]) < 1e-12);
    CHECK(std::abs(grads.head_b[1]) < 1e-12);

    SegmentedExample bad = labeled_example(rng, cfg, 2, "c");
    CHECK_THROWS_AS(loss_and_grads(w, bad, labels, cfg), InputError);
}

TEST_CASE("fresh init loss is about ln 2 on a balanced task") {
    SyntheticTaskSpec spec;
    spec.seq_len = 6;
    spec.vocab = 40;
    spec.n_train = 256;
    spec.n_eval = 0;
    spec.seed = 99;
    SyntheticData data = gen_synthetic(spec);

    ModelConfig cfg = grad_config(2, 1);
    cfg.vocab_size = 40;
    ModelWeights<double> w = init_weights<double>(cfg, 3, 2);
    double loss = 0;
    for (const auto& ex : data.train) loss += loss_only(w, ex, data.labels, cfg);
    CHECK(std::abs(loss / 256 - std::log(2.0)) < 0.05);
}

TEST_CASE("finite differences confirm analytic gradients across P endpoints") {
    Rng rng(2024);
    for (uint32_t parallel : {0u, 1u, 3u}) {
        ModelConfig cfg = grad_config(3, parallel);
        ModelWeights<double> w = init_weights<double>(cfg, 400 + parallel, 2);
        SegmentedExample ex = labeled_example(rng, cfg, 2, "pos");
        double err = finite_diff_check(w, ex, {"pos", "neg"}, cfg, 1e-5, 120, 31 + parallel);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("finite differences hold without relative bias and with sinusoidal positions") {
    Rng rng(2025);
    for (PosScheme scheme : {PosScheme::none, PosScheme::sinusoidal_local}) {
        ModelConfig cfg = grad_config(2, 1);
        cfg.pos_scheme = scheme;
        ModelWeights<double> w = init_weights<double>(cfg, 500, 3);
        SegmentedExample ex = labeled_example(rng, cfg, 3, "m");
        double err = finite_diff_check(w, ex, {"l", "m", "r"}, cfg, 1e-5, 100, 7);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("zero-weight model: analytic and numeric gradients agree") {
    ModelConfig cfg = grad_config(2, 1);
    ModelWeights<double> w = init_weights<double>(cfg, 1, 2);
    for (auto& lw : w.layers) {
        for (auto* m : {&lw.wq, &lw.wk, &lw.wv, &lw.wo, &lw.w1, &lw.w2})
            std::fill(m->data.begin(), m->data.end(), 0.0);
        std::fill(lw.rel_bias.data.begin(), lw.rel_bias.data.end(), 0.0);
    }
    Rng rng(2);
    SegmentedExample ex = labeled_example(rng, cfg, 2, "x");
    double err = finite_diff_check(w, ex, {"x", "y"}, cfg, 1e-5, 80, 9);
    CHECK(err < 1e-4);
}

TEST_CASE("adam: zero gradients leave weights unchanged") {
    ModelConfig cfg = grad_config(2, 0);
    ModelWeights<double> w = init_weights<double>(cfg, 8, 2);
    ModelWeights<double> before = w;
    AdamState<double> state = AdamState<double>::zeros_like(w);
    Gradients<double> zeros = Gradients<double>::zeros_like(w);
    adam_step(w, zeros, state);
    CHECK(bit_identical(w.embedding, before.embedding));
    CHECK(bit_identical(w.layers[1].w2, before.layers[1].w2));
    CHECK(w.head.b == before.head.b);
}

TEST_CASE("adam: constant gradient drives the parameter monotonically") {
    ModelConfig cfg = grad_config(2, 0);
    ModelWeights<double> w = init_weights<double>(cfg, 9, 2);
    AdamState<double> state = AdamState<double>::zeros_like(w);
    Gradients<double> g = Gradients<double>::zeros_like(w);
    g.embedding(0, 0) = 0.75;   // positive gradient: parameter must fall
    g.embedding(1, 1) = -0.25;  // negative gradient: parameter must rise
    double prev0 = w.embedding(0, 0), prev1 = w.embedding(1, 1);
    for (int t = 0; t < 6; ++t) {
        adam_step(w, g, state, 1e-3);
        CHECK(w.embedding(0, 0) < prev0);
        CHECK(w.embedding(1, 1) > prev1);
        prev0 = w.embedding(0, 0);
        prev1 = w.embedding(1, 1);
    }
}

TEST_CASE("adam: first step from zero state moves by about -lr * sign(g)") {
    ModelConfig cfg = grad_config(2, 0);
    ModelWeights<double> w = init_weights<double>(cfg, 10, 2);
    const double x0 = w.embedding(0, 0);
    AdamState<double> state = AdamState<double>::zeros_like(w);
    Gradients<double> g = Gradients<double>::zeros_like(w);
    g.embedding(0, 0) = 0.3;
    adam_step(w, g, state, 1e-3);
    // bias-corrected first step: lr * g / (|g| + eps)
    CHECK(w.embedding(0, 0) == doctest::Approx(x0 - 1e-3).epsilon(1e-6));
}

TEST_CASE("training is reproducible and reports a sane curve") {
    SyntheticTaskSpec spec;
    spec.seq_len = 4;
    spec.vocab = 30;
    spec.n_train = 64;
    spec.n_eval = 32;
    spec.seed = 10;

    ModelConfig cfg = grad_config(2, 1);
    cfg.vocab_size = 30;
    TrainOptions opt;
    opt.steps = 12;
    opt.eval_every = 4;
    opt.batch_size = 8;
    opt.seed = 21;

    TrainMetrics a = train<float>(spec, cfg, opt);
    TrainMetrics b = train<float>(spec, cfg, opt);
    REQUIRE(a.curve.size() == b.curve.size());
    REQUIRE(a.curve.size() == 3);
    for (size_t i = 0; i < a.curve.size(); ++i) {
        CHECK(a.curve[i].step == b.curve[i].step);
        CHECK(a.curve[i].loss == b.curve[i].loss);  // bit-reproducible
        CHECK(a.curve[i].eval_accuracy == b.curve[i].eval_accuracy);
        CHECK(std::isfinite(a.curve[i].loss));
    }
    CHECK(a.final_accuracy == a.curve.back().eval_accuracy);
    CHECK(a.best_accuracy >= a.final_accuracy);
}
