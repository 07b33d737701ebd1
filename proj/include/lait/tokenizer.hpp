#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lait/config.hpp"

namespace lait {

// Hash tokenizer standing in for sentencepiece: lowercase, split on
// whitespace, id = 2 + (FNV-1a-64(token) mod (vocab_size - 2)). EOS is
// appended to every segment; PAD stays unused on the reference path.
std::vector<uint32_t> tokenize(const std::string& text, const ModelConfig& cfg);

// FNV-1a over token ids serialized as little-endian u32, in order. Shared by
// the representation cache and dataset dedup accounting.
uint64_t token_digest(const std::vector<uint32_t>& token_ids);

}  // namespace lait
