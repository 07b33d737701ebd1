#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "lait/bytes.hpp"
#include "lait/errors.hpp"
#include "lait/fnv.hpp"
#include "lait/fsio.hpp"
#include "lait/matrix.hpp"

namespace lait {

// Identifies one segment's layer-P representation. A cached matrix is only
// valid for the exact weights (fingerprint), the exact parallel depth, and
// the exact token sequence; a stale fingerprint simply forms a different key
// and misses.
struct CacheKey {
    uint64_t model_fingerprint = 0;
    uint64_t p_layers = 0;
    uint64_t token_digest = 0;

    bool operator==(const CacheKey&) const = default;

    uint64_t combined_digest() const {
        Fnv1a h;
        h.update_u64le(model_fingerprint);
        h.update_u64le(p_layers);
        h.update_u64le(token_digest);
        return h.digest();
    }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        uint64_t d = combined_digest();
        std::string s(16, '0');
        for (int i = 15; i >= 0; --i, d >>= 4) s[static_cast<size_t>(i)] = digits[d & 0xf];
        return s;
    }
};

uint64_t token_digest(const std::vector<uint32_t>& token_ids);

// P = 0 representations depend on joint context and are not cacheable.
inline CacheKey cache_key(uint64_t model_fingerprint, uint64_t p_layers,
                          const std::vector<uint32_t>& token_ids) {
    if (p_layers == 0) throw ConfigError("cache_key: P=0 has nothing cacheable");
    return CacheKey{model_fingerprint, p_layers, token_digest(token_ids)};
}

inline constexpr size_t kCacheEntryHeaderBytes = 16;

template <typename T>
struct CacheEntry {
    CacheKey key;
    std::shared_ptr<const Matrix<T>> rep;
    uint64_t last_used = 0;
    size_t bytes = 0;
    std::vector<uint32_t> tokens;  // kept only in paranoid mode

    CacheEntry() = default;
    CacheEntry(CacheKey k, Matrix<T> r) : key(k) {
        if (r.rows == 0 || r.cols == 0)
            throw ShapeError("cache entry: representation must be non-empty");
        bytes = kCacheEntryHeaderBytes + r.rows * r.cols * 4;
        rep = std::make_shared<const Matrix<T>>(std::move(r));
    }
};

inline constexpr char kCacheMagic[5] = {'L', 'A', 'I', 'T', 'C'};
inline constexpr uint8_t kCacheVersion = 1;

// Upper bound on any serialized dimension; corrupt headers must produce
// errors, not multi-gigabyte allocations.
inline constexpr uint32_t kMaxPlausibleDim = 1u << 24;

// On-disk entry: magic "LAITC", version u8, key (3 x u64 LE), rows u32 LE,
// cols u32 LE, payload f32 LE row-major.
std::vector<uint8_t> serialize_entry(const CacheEntry<float>& entry);
CacheEntry<float> deserialize_entry(const std::vector<uint8_t>& bytes);

struct CacheCounters {
    uint64_t hits = 0;
    uint64_t misses = 0;
    uint64_t evictions = 0;
    uint64_t evicted_bytes = 0;
};

// Byte-budgeted LRU store of layer-P segment representations, safe for
// concurrent get/put. Readers receive shared immutable snapshots that stay
// valid after eviction; duplicate puts are last-writer-wins. With a persist
// directory (float only), entries are also written to disk, one file per
// entry named by the hex of the combined key digest, and misses fall back
// to disk before being reported.
//
// Key digests are trusted by default; FNV collisions are accepted at desk
// scale. Paranoid mode stores the token ids with each in-memory entry and
// compares them on lookup, trading space for collision immunity (disk
// entries carry no token section, so the check is in-memory only).
template <typename T>
class RepCache {
public:
    explicit RepCache(size_t budget_bytes, std::string persist_dir = "", bool paranoid = false)
        : budget_(budget_bytes), dir_(std::move(persist_dir)), paranoid_(paranoid) {
        if (!dir_.empty()) {
            if constexpr (!std::is_same_v<T, float>)
                throw ConfigError("cache persistence stores 32-bit floats; use f32 precision");
            std::filesystem::create_directories(dir_);
        }
    }

    size_t budget() const { return budget_; }
    bool paranoid() const { return paranoid_; }

    // Inserts (or replaces) and evicts least-recently-used entries until the
    // resident total fits the budget. Returns the number of bytes evicted.
    size_t put(const CacheKey& key, Matrix<T> rep, const std::vector<uint32_t>* token_ids = nullptr) {
        CacheEntry<T> entry(key, std::move(rep));
        if (paranoid_) {
            if (!token_ids)
                throw ConfigError("paranoid cache requires token ids on put");
            entry.tokens = *token_ids;
        }
        if (entry.bytes > budget_)
            throw ConfigError("cache entry of " + std::to_string(entry.bytes) +
                              " bytes exceeds budget " + std::to_string(budget_));
        std::vector<uint8_t> file_bytes;
        if (!dir_.empty()) {
            if constexpr (std::is_same_v<T, float>) file_bytes = serialize_entry(entry);
        }
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            resident_ -= it->second.bytes;
            lru_.erase(it->second.last_used);
            map_.erase(it);
        }
        entry.last_used = ++tick_;
        resident_ += entry.bytes;
        lru_[entry.last_used] = key;
        map_[key] = entry;
        size_t evicted = 0;
        while (resident_ > budget_) {
            auto oldest = lru_.begin();
            auto victim = map_.find(oldest->second);
            evicted += victim->second.bytes;
            resident_ -= victim->second.bytes;
            counters_.evictions++;
            counters_.evicted_bytes += victim->second.bytes;
            map_.erase(victim);
            lru_.erase(oldest);
        }
        if (!file_bytes.empty()) atomic_write_bytes(entry_path(key), file_bytes);
        return evicted;
    }

    // Returns an immutable snapshot, or null on miss. Refreshes recency. In
    // paranoid mode a digest hit with different token ids counts as a miss.
    std::shared_ptr<const Matrix<T>> get(const CacheKey& key,
                                         const std::vector<uint32_t>* token_ids = nullptr) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = map_.find(key);
            if (it != map_.end()) {
                if (paranoid_) {
                    if (!token_ids)
                        throw ConfigError("paranoid cache requires token ids on get");
                    if (it->second.tokens != *token_ids) {
                        counters_.misses++;
                        return nullptr;
                    }
                }
                lru_.erase(it->second.last_used);
                it->second.last_used = ++tick_;
                lru_[it->second.last_used] = key;
                counters_.hits++;
                return it->second.rep;
            }
        }
        if (!dir_.empty() && !paranoid_) {
            if constexpr (std::is_same_v<T, float>) {
                const std::string path = entry_path(key);
                if (file_exists(path)) {
                    CacheEntry<float> entry = deserialize_entry(read_file_bytes(path));
                    if (entry.key == key) {
                        auto rep = entry.rep;
                        put(key, Matrix<float>(*rep));
                        std::lock_guard<std::mutex> lock(mu_);
                        counters_.hits++;
                        return rep;
                    }
                }
            }
        }
        std::lock_guard<std::mutex> lock(mu_);
        counters_.misses++;
        return nullptr;
    }

    size_t resident_bytes() const {
        std::lock_guard<std::mutex> lock(mu_);
        return resident_;
    }
    size_t entry_count() const {
        std::lock_guard<std::mutex> lock(mu_);
        return map_.size();
    }
    CacheCounters counters() const {
        std::lock_guard<std::mutex> lock(mu_);
        return counters_;
    }

private:
    struct KeyHash {
        size_t operator()(const CacheKey& k) const {
            return static_cast<size_t>(k.combined_digest());
        }
    };

    std::string entry_path(const CacheKey& key) const {
        return (std::filesystem::path(dir_) / key.hex()).string();
    }

    mutable std::mutex mu_;
    size_t budget_;
    std::string dir_;
    bool paranoid_ = false;
    uint64_t tick_ = 0;
    size_t resident_ = 0;
    CacheCounters counters_;
    std::unordered_map<CacheKey, CacheEntry<T>, KeyHash> map_;
    std::map<uint64_t, CacheKey> lru_;  // recency tick -> key
};

}  // namespace lait
