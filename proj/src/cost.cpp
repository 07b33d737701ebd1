#include "lait/cost.hpp"

#include <unordered_map>

#include "lait/errors.hpp"

namespace lait {

namespace {

void check_lengths(const std::vector<uint64_t>& lengths) {
    if (lengths.empty()) throw InputError("length profile has no segments");
    for (uint64_t l : lengths)
        if (l == 0) throw InputError("length profile has a zero-length segment");
}

uint64_t sum(const std::vector<uint64_t>& v) {
    uint64_t s = 0;
    for (uint64_t x : v) s += x;
    return s;
}

uint64_t sum_squares(const std::vector<uint64_t>& v) {
    uint64_t s = 0;
    for (uint64_t x : v) s += x * x;
    return s;
}

}  // namespace

CostReport attention_ops(const std::vector<uint64_t>& lengths, uint32_t layers,
                         uint32_t parallel) {
    if (parallel > layers) throw ConfigError("attention_ops: P must satisfy 0 <= P <= L");
    check_lengths(lengths);
    const uint64_t m = sum(lengths);
    CostReport r;
    r.ops_parallel = static_cast<uint64_t>(parallel) * sum_squares(lengths);
    r.ops_joint = static_cast<uint64_t>(layers - parallel) * m * m;
    r.ops_total = r.ops_parallel + r.ops_joint;
    r.baseline_ops = static_cast<uint64_t>(layers) * m * m;
    r.ratio = r.baseline_ops ? static_cast<double>(r.ops_total) / static_cast<double>(r.baseline_ops)
                             : 1.0;
    return r;
}

CostReport attention_ops(const std::vector<uint64_t>& lengths, uint32_t layers, uint32_t parallel,
                         const ModelConfig& cfg) {
    CostReport r = attention_ops(lengths, layers, parallel);
    r.flops = ops_to_flops(r.ops_total, cfg);
    return r;
}

uint64_t ops_to_flops(uint64_t ops, const ModelConfig& cfg) {
    return ops * 4ull * cfg.n_heads * cfg.d_head;
}

DatasetCost dataset_ops(const std::vector<LengthRecord>& records, uint32_t layers,
                        uint32_t parallel) {
    if (records.empty()) throw InputError("no length records");
    DatasetCost d;
    d.ops_total = 0;
    d.baseline_ops = 0;
    for (const auto& rec : records) {
        CostReport r = attention_ops(rec.lengths, layers, parallel);
        d.ops_total += r.ops_total * rec.multiplicity;
        d.baseline_ops += r.baseline_ops * rec.multiplicity;
    }
    d.ratio = d.baseline_ops
                  ? static_cast<double>(d.ops_total) / static_cast<double>(d.baseline_ops)
                  : 1.0;
    return d;
}

double dataset_cost(const std::vector<LengthRecord>& records, uint32_t layers, uint32_t parallel) {
    return dataset_ops(records, layers, parallel).ratio;
}

DatasetCost cached_dataset_ops(const std::vector<LengthRecord>& records, uint32_t layers,
                               uint32_t parallel) {
    if (records.empty()) throw InputError("no length records");
    if (parallel > layers) throw ConfigError("cached_dataset_ops: P must satisfy 0 <= P <= L");
    DatasetCost d;
    d.ops_total = 0;
    d.baseline_ops = 0;
    std::unordered_map<uint64_t, uint64_t> seen;  // digest -> length
    for (const auto& rec : records) {
        check_lengths(rec.lengths);
        if (rec.segment_digests.size() != rec.lengths.size())
            throw InputError("cached cost requires one digest per segment");
        const uint64_t m = sum(rec.lengths);
        for (size_t i = 0; i < rec.lengths.size(); ++i) {
            auto [it, inserted] = seen.emplace(rec.segment_digests[i], rec.lengths[i]);
            if (!inserted) {
                if (it->second != rec.lengths[i])
                    throw InputError("digest reused with a different segment length");
                continue;  // parallel cost already paid for this segment
            }
            d.ops_total += static_cast<uint64_t>(parallel) * rec.lengths[i] * rec.lengths[i];
        }
        d.ops_total += static_cast<uint64_t>(layers - parallel) * m * m * rec.multiplicity;
        d.baseline_ops += static_cast<uint64_t>(layers) * m * m * rec.multiplicity;
    }
    d.ratio = d.baseline_ops
                  ? static_cast<double>(d.ops_total) / static_cast<double>(d.baseline_ops)
                  : 1.0;
    return d;
}

double cached_dataset_cost(const std::vector<LengthRecord>& records, uint32_t layers,
                           uint32_t parallel) {
    return cached_dataset_ops(records, layers, parallel).ratio;
}

}  // namespace lait
