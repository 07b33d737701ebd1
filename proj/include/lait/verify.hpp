#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lait {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// The full structural-invariant suite: dual-path equivalence, endpoint
// identities, ops-counter agreement with the analytic cost model, cache
// transparency, gradient checks, cost monotonicity and serialization
// round-trips. Deterministic given the seed; sized to finish in well under
// a minute.
std::vector<CheckResult> run_verification(uint64_t seed);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace lait
