#include "lait/tokenizer.hpp"

#include <cctype>

#include "lait/errors.hpp"
#include "lait/fnv.hpp"

namespace lait {

std::vector<uint32_t> tokenize(const std::string& text, const ModelConfig& cfg) {
    if (text.empty()) throw InputError("tokenize: empty text");
    const uint64_t id_space = cfg.vocab_size - kReservedIds;
    std::vector<uint32_t> ids;
    Fnv1a hasher;
    bool in_token = false;
    auto flush = [&]() {
        if (in_token) {
            ids.push_back(kReservedIds + static_cast<uint32_t>(hasher.digest() % id_space));
            hasher = Fnv1a();
            in_token = false;
        }
    };
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            flush();
        } else {
            unsigned char lower = static_cast<unsigned char>(std::tolower(c));
            hasher.update(&lower, 1);
            in_token = true;
        }
    }
    flush();
    ids.push_back(kEosId);
    return ids;
}

uint64_t token_digest(const std::vector<uint32_t>& token_ids) {
    Fnv1a h;
    for (uint32_t id : token_ids) h.update_u32le(id);
    return h.digest();
}

}  // namespace lait
