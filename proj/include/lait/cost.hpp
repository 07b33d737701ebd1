#pragma once

#include <cstdint>
#include <vector>

#include "lait/config.hpp"

namespace lait {

// Attention-operation accounting for one input or a dataset. An "op" is one
// allowed query-key pair in one layer:
//   O_PAR = P * sum_i |s_i|^2
//   O_FSA = (L - P) * (sum_i |s_i|)^2
//   O     = O_PAR + O_FSA
// The baseline is the fully self-attentive P=0 encoding of the same input.
struct CostReport {
    uint64_t ops_parallel = 0;
    uint64_t ops_joint = 0;
    uint64_t ops_total = 0;
    uint64_t flops = 0;  // filled when a model config is supplied
    uint64_t baseline_ops = 0;
    double ratio = 1.0;  // ops_total / baseline_ops, in (0, 1]
};

// One example's segment-length profile. `multiplicity` collapses repeated
// identical profiles; `segment_digests`, when present, identify segment
// content for caching-aware accounting.
struct LengthRecord {
    std::vector<uint64_t> lengths;
    uint64_t multiplicity = 1;
    std::vector<uint64_t> segment_digests;
};

CostReport attention_ops(const std::vector<uint64_t>& lengths, uint32_t layers, uint32_t parallel);
CostReport attention_ops(const std::vector<uint64_t>& lengths, uint32_t layers, uint32_t parallel,
                         const ModelConfig& cfg);

// Pairwise attention arithmetic only: per allowed pair and head, 2*d_head
// multiply-adds for the query-key score and another 2*d_head for value
// accumulation. Projections and softmax are invariant in P and excluded,
// so op ratios are exactly FLOP ratios.
uint64_t ops_to_flops(uint64_t ops, const ModelConfig& cfg);

struct DatasetCost {
    uint64_t ops_total = 0;
    uint64_t baseline_ops = 0;
    double ratio = 1.0;
};

// Summed per example (not over average lengths; the ratio of sums differs
// from the sum of ratios of averages by Jensen's inequality).
DatasetCost dataset_ops(const std::vector<LengthRecord>& records, uint32_t layers,
                        uint32_t parallel);
double dataset_cost(const std::vector<LengthRecord>& records, uint32_t layers, uint32_t parallel);

// Caching-aware variant: parallel-phase cost is paid once per unique
// (digest, P), joint-phase cost once per example occurrence. Requires
// digests on every record.
DatasetCost cached_dataset_ops(const std::vector<LengthRecord>& records, uint32_t layers,
                               uint32_t parallel);
double cached_dataset_cost(const std::vector<LengthRecord>& records, uint32_t layers,
                           uint32_t parallel);

}  // namespace lait
