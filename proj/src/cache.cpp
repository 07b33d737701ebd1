#include "lait/cache.hpp"

namespace lait {

std::vector<uint8_t> serialize_entry(const CacheEntry<float>& entry) {
    ByteWriter w;
    w.raw(kCacheMagic, 5);
    w.u8(kCacheVersion);
    w.u64(entry.key.model_fingerprint);
    w.u64(entry.key.p_layers);
    w.u64(entry.key.token_digest);
    w.u32(static_cast<uint32_t>(entry.rep->rows));
    w.u32(static_cast<uint32_t>(entry.rep->cols));
    for (float v : entry.rep->data) w.f32(v);
    return w.bytes;
}

CacheEntry<float> deserialize_entry(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes.data(), bytes.size(), "cache entry");
    char magic[5];
    r.raw(magic, 5);
    if (std::memcmp(magic, kCacheMagic, 5) != 0) throw FormatError("cache entry: bad magic");
    uint8_t version = r.u8();
    if (version != kCacheVersion)
        throw FormatError("cache entry: unsupported version " + std::to_string(version));
    CacheKey key;
    key.model_fingerprint = r.u64();
    key.p_layers = r.u64();
    key.token_digest = r.u64();
    uint32_t rows = r.u32();
    uint32_t cols = r.u32();
    if (rows == 0 || cols == 0) throw FormatError("cache entry: empty matrix");
    if (rows > kMaxPlausibleDim || cols > kMaxPlausibleDim)
        throw FormatError("cache entry: implausible dimensions");
    if (r.remaining() != static_cast<size_t>(rows) * cols * 4)
        throw FormatError("cache entry: payload size mismatch");
    Matrix<float> rep(rows, cols);
    for (float& v : rep.data) v = r.f32();
    return CacheEntry<float>(key, std::move(rep));
}

}  // namespace lait
