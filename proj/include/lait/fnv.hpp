#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace lait {

inline constexpr uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

// Incremental FNV-1a over bytes. Used for token ids, weight fingerprints
// and cache keys; not a cryptographic hash.
class Fnv1a {
public:
    void update(const void* data, size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= kFnvPrime;
        }
    }
    void update_u32le(uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        update(b, 4);
    }
    void update_u64le(uint64_t v) {
        update_u32le(static_cast<uint32_t>(v & 0xffffffffu));
        update_u32le(static_cast<uint32_t>(v >> 32));
    }
    uint64_t digest() const { return state_; }

private:
    uint64_t state_ = kFnvOffset;
};

inline uint64_t fnv1a64(std::string_view bytes) {
    Fnv1a h;
    h.update(bytes.data(), bytes.size());
    return h.digest();
}

}  // namespace lait
