#include <doctest.h>

#include "lait/weights.hpp"

using namespace lait;

namespace {

ModelConfig io_config() {
    ModelConfig cfg;
    cfg.layers = 2;
    cfg.parallel = 1;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.d_head = 4;
    cfg.d_ff = 12;
    cfg.vocab_size = 20;
    return cfg;
}

}  // namespace

TEST_CASE("weights serialize/parse round-trips bit-exactly") {
    ModelWeights<float> w = init_weights<float>(io_config(), 99, 3);
    std::vector<uint8_t> bytes = serialize_weights(w);
    ModelWeights<float> back = parse_weights<float>(bytes);

    CHECK(back.config.weights_compatible(w.config));
    CHECK(back.config.parallel == w.config.parallel);
    CHECK(bit_identical(back.embedding, w.embedding));
    REQUIRE(back.layers.size() == w.layers.size());
    for (size_t l = 0; l < w.layers.size(); ++l) {
        CHECK(bit_identical(back.layers[l].wq, w.layers[l].wq));
        CHECK(bit_identical(back.layers[l].wo, w.layers[l].wo));
        CHECK(bit_identical(back.layers[l].w2, w.layers[l].w2));
        CHECK(back.layers[l].gain_attn == w.layers[l].gain_attn);
        CHECK(bit_identical(back.layers[l].rel_bias, w.layers[l].rel_bias));
    }
    REQUIRE(back.head.n_labels() == 3);
    CHECK(bit_identical(back.head.w, w.head.w));
    CHECK(back.head.b == w.head.b);
    CHECK(back.fingerprint == w.fingerprint);
    CHECK(serialize_weights(back) == bytes);
}

TEST_CASE("weights without a head round-trip too") {
    ModelWeights<float> w = init_weights<float>(io_config(), 7);
    ModelWeights<float> back = parse_weights<float>(serialize_weights(w));
    CHECK(back.head.n_labels() == 0);
    CHECK(back.fingerprint == w.fingerprint);
}

TEST_CASE("weights format errors are structured") {
    ModelWeights<float> w = init_weights<float>(io_config(), 13, 2);
    std::vector<uint8_t> bytes = serialize_weights(w);

    std::vector<uint8_t> bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(parse_weights<float>(bad_magic), FormatError);

    std::vector<uint8_t> bad_version = bytes;
    bad_version[5] = 9;
    CHECK_THROWS_AS(parse_weights<float>(bad_version), FormatError);

    std::vector<uint8_t> truncated(bytes.begin(), bytes.begin() + bytes.size() / 2);
    CHECK_THROWS_AS(parse_weights<float>(truncated), FormatError);

    std::vector<uint8_t> ragged = bytes;
    ragged.push_back(0);
    CHECK_THROWS_AS(parse_weights<float>(ragged), FormatError);
}

TEST_CASE("fingerprint tracks mutations") {
    ModelWeights<float> w = init_weights<float>(io_config(), 5);
    const uint64_t before = w.fingerprint;
    w.layers[0].wq(0, 0) += 0.5f;
    w.refresh_fingerprint();
    CHECK(w.fingerprint != before);
    w.layers[0].wq(0, 0) -= 0.5f;
    w.refresh_fingerprint();
    CHECK(w.fingerprint == before);
}

TEST_CASE("fingerprint matches the serialized bytes after the magic") {
    ModelWeights<float> w = init_weights<float>(io_config(), 17, 2);
    std::vector<uint8_t> bytes = serialize_weights(w);
    Fnv1a h;
    h.update(bytes.data() + 5, bytes.size() - 5);
    CHECK(w.fingerprint == h.digest());
}

TEST_CASE("config validation") {
    ModelConfig cfg = io_config();
    cfg.d_head = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = io_config();
    cfg.parallel = 5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = io_config();
    cfg.vocab_size = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
