#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "lait/errors.hpp"
#include "lait/matrix.hpp"

namespace lait {

// Attention mask over the concatenated token sequence. Only two kinds occur
// in LAIT: block-diagonal (parallel layers) and full (joint layers). Both
// give every query a contiguous allowed range, which the attention kernel
// exploits; the diagonal is always allowed.
struct AttentionMask {
    enum class Kind { block_diagonal, full };

    Kind kind = Kind::full;
    size_t side = 0;
    std::vector<size_t> lengths;  // per-segment lengths; block_diagonal only
    std::vector<size_t> offsets;  // running starts, lengths.size()+1 entries

    static AttentionMask full_mask(size_t side) {
        AttentionMask m;
        m.kind = Kind::full;
        m.side = side;
        m.lengths = {side};
        m.offsets = {0, side};
        return m;
    }

    struct Range {
        size_t begin;
        size_t end;
    };

    // Allowed key range for query i. Contiguous by construction.
    Range row_range(size_t i) const {
        if (kind == Kind::full) return {0, side};
        size_t lo = 0, hi = offsets.size() - 1;
        while (lo + 1 < hi) {
            size_t mid = (lo + hi) / 2;
            if (offsets[mid] <= i) lo = mid;
            else hi = mid;
        }
        return {offsets[lo], offsets[lo + 1]};
    }

    bool allowed(size_t i, size_t j) const {
        Range r = row_range(i);
        return j >= r.begin && j < r.end;
    }

    uint64_t allowed_pairs() const {
        if (kind == Kind::full) return static_cast<uint64_t>(side) * side;
        uint64_t n = 0;
        for (size_t len : lengths) n += static_cast<uint64_t>(len) * len;
        return n;
    }

    BoolMatrix dense() const {
        BoolMatrix b(side, side, false);
        for (size_t i = 0; i < side; ++i) {
            Range r = row_range(i);
            for (size_t j = r.begin; j < r.end; ++j) b(i, j) = 1;
        }
        return b;
    }
};

inline AttentionMask build_block_mask(const std::vector<size_t>& lengths) {
    if (lengths.empty()) throw ShapeError("build_block_mask: no segments");
    AttentionMask m;
    m.kind = AttentionMask::Kind::block_diagonal;
    m.lengths = lengths;
    m.offsets.resize(lengths.size() + 1);
    m.offsets[0] = 0;
    for (size_t i = 0; i < lengths.size(); ++i) {
        if (lengths[i] == 0) throw ShapeError("build_block_mask: zero-length segment");
        m.offsets[i + 1] = m.offsets[i] + lengths[i];
    }
    m.side = m.offsets.back();
    return m;
}

}  // namespace lait
