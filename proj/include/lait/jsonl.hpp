#pragma once

#include <string>
#include <vector>

#include "lait/config.hpp"
#include "lait/cost.hpp"
#include "lait/pipeline.hpp"

namespace lait {

// Example corpus, one JSON object per line:
//   {"task": "mnli", "fields": {"hypothesis": "...", "premise": "..."},
//    "label": "entailment"}
// The "raw" task takes its segments directly:
//   {"task": "raw", "fields": ["segment one", "segment two"]}
// Parse failures carry the 1-based line number.
std::vector<SegmentedExample> read_examples_jsonl(const std::string& path,
                                                  const ModelConfig& cfg);

// Length records, one per line: {"lengths": [16, 31], "mult": 1,
// "digests": ["a1b2...", "..."]} with mult and digests optional; digests are
// 16 hex digits of the segment token digest.
std::vector<LengthRecord> read_length_records_jsonl(const std::string& path);

std::string digest_hex(uint64_t digest);
uint64_t parse_digest_hex(const std::string& hex);

}  // namespace lait
