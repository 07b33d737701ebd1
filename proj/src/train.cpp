#include "lait/train.hpp"

namespace lait {

namespace {

std::vector<uint32_t> random_ids(Rng& rng, uint32_t n, uint32_t vocab) {
    std::vector<uint32_t> ids(n);
    for (auto& id : ids)
        id = kReservedIds + static_cast<uint32_t>(rng.below(vocab - kReservedIds));
    return ids;
}

bool share_token(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    for (uint32_t x : a)
        for (uint32_t y : b)
            if (x == y) return true;
    return false;
}

}  // namespace

SyntheticData gen_synthetic(const SyntheticTaskSpec& spec) {
    if (spec.seq_len < 2)
        throw ConfigError("seq_len must be >= 2; a single token has no non-identity permutation");
    if (spec.vocab <= kReservedIds)
        throw ConfigError("vocab must exceed the reserved ids");
    if (spec.kind == SyntheticTaskSpec::Kind::shared_token &&
        spec.vocab - kReservedIds < 2 * spec.seq_len)
        throw ConfigError("vocab too small to build disjoint segment pairs");

    SyntheticData data;
    data.labels = spec.kind == SyntheticTaskSpec::Kind::copy_vs_shuffle
                      ? std::vector<std::string>{"same", "diff"}
                      : std::vector<std::string>{"yes", "no"};

    Rng rng(spec.seed);
    const uint64_t total = static_cast<uint64_t>(spec.n_train) + spec.n_eval;
    for (uint64_t idx = 0; idx < total; ++idx) {
        const bool positive = idx % 2 == 0;  // exact n/2 balance for even splits
        SegmentedExample ex;
        ex.task_id = to_string(spec.kind);
        ex.label = positive ? data.labels[0] : data.labels[1];

        if (spec.kind == SyntheticTaskSpec::Kind::copy_vs_shuffle) {
            std::vector<uint32_t> seg1 = random_ids(rng, spec.seq_len, spec.vocab);
            std::vector<uint32_t> seg2 = seg1;
            if (!positive) {
                int attempts = 0;
                do {
                    rng.shuffle(seg2);
                    if (++attempts > 64) {  // constant segment: no distinct permutation exists
                        seg1 = random_ids(rng, spec.seq_len, spec.vocab);
                        seg2 = seg1;
                        attempts = 0;
                    }
                } while (seg2 == seg1);
            }
            ex.segments = {std::move(seg1), std::move(seg2)};
        } else {
            std::vector<uint32_t> seg1 = random_ids(rng, spec.seq_len, spec.vocab);
            std::vector<uint32_t> seg2 = random_ids(rng, spec.seq_len, spec.vocab);
            if (positive) {
                if (!share_token(seg1, seg2))
                    seg2[rng.below(spec.seq_len)] = seg1[rng.below(spec.seq_len)];
            } else {
                int attempts = 0;
                while (share_token(seg1, seg2)) {
                    seg2 = random_ids(rng, spec.seq_len, spec.vocab);
                    if (++attempts > 10000)
                        throw ConfigError("could not sample disjoint segments; enlarge vocab");
                }
            }
            ex.segments = {std::move(seg1), std::move(seg2)};
        }

        if (idx < spec.n_train) data.train.push_back(std::move(ex));
        else data.eval.push_back(std::move(ex));
    }
    return data;
}

}  // namespace lait
