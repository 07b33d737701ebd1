#pragma once

#include <cstdint>
#include <string>

#include "lait/errors.hpp"

namespace lait {

// Reserved token ids. PAD is unused on the reference path; EOS terminates
// every segment.
inline constexpr uint32_t kPadId = 0;
inline constexpr uint32_t kEosId = 1;
inline constexpr uint32_t kReservedIds = 2;

enum class PosScheme : uint32_t {
    none = 0,
    sinusoidal_local = 1,
    relative_bucket = 2,
};

inline const char* to_string(PosScheme s) {
    switch (s) {
        case PosScheme::none: return "none";
        case PosScheme::sinusoidal_local: return "sinusoidal-local";
        case PosScheme::relative_bucket: return "relative-bucket";
    }
    return "?";
}

inline PosScheme pos_scheme_from_string(const std::string& s) {
    if (s == "none") return PosScheme::none;
    if (s == "sinusoidal-local") return PosScheme::sinusoidal_local;
    if (s == "relative-bucket") return PosScheme::relative_bucket;
    throw ConfigError("unknown position scheme: " + s);
}

struct ModelConfig {
    uint32_t layers = 12;       // L, total encoder layers
    uint32_t parallel = 0;      // P, layers encoded per segment, 0 <= P <= L
    uint32_t d_model = 768;
    uint32_t n_heads = 12;
    uint32_t d_head = 64;
    uint32_t d_ff = 3072;
    uint32_t vocab_size = 32000;
    PosScheme pos_scheme = PosScheme::relative_bucket;
    uint32_t rel_buckets = 32;
    uint32_t rel_max_distance = 128;

    void validate() const {
        if (n_heads == 0 || d_head == 0 || n_heads * d_head != d_model)
            throw ConfigError("n_heads*d_head must equal d_model");
        if (parallel > layers) throw ConfigError("P must satisfy 0 <= P <= L");
        if (vocab_size < kReservedIds + 1)
            throw ConfigError("vocab_size must exceed the reserved special ids");
        if (pos_scheme == PosScheme::relative_bucket) {
            if (rel_buckets < 4 || rel_buckets % 2 != 0)
                throw ConfigError("rel_buckets must be even and >= 4");
            if (rel_max_distance <= rel_buckets / 4)
                throw ConfigError("rel_max_distance must exceed rel_buckets/4");
        }
    }

    // Whether weights produced under `this` are usable with `run`. P is an
    // execution knob, not a weight shape, so it may differ.
    bool weights_compatible(const ModelConfig& run) const {
        return layers == run.layers && d_model == run.d_model && n_heads == run.n_heads &&
               d_head == run.d_head && d_ff == run.d_ff && vocab_size == run.vocab_size &&
               pos_scheme == run.pos_scheme && rel_buckets == run.rel_buckets &&
               rel_max_distance == run.rel_max_distance;
    }
};

}  // namespace lait
