#pragma once

#include <cstdint>
#include <vector>

#include "neolog/corpus.hpp"

namespace neolog {

struct freq_gate_stats {
    std::uint64_t kept_clean = 0;
    std::uint64_t dropped_low_clean = 0;    // unflagged, count below threshold
    std::uint64_t dropped_low_flagged = 0;  // flagged and too rare to reintegrate
    std::uint64_t reintegrated_typo = 0;
    std::uint64_t reintegrated_concat = 0;

    std::uint64_t dropped() const { return dropped_low_clean + dropped_low_flagged; }
    std::uint64_t reintegrated() const { return reintegrated_typo + reintegrated_concat; }
};

// Minimum-occurrence threshold with reintegration: a token flagged TYPO or
// CONCAT earlier survives anyway when its count clears the same threshold
// (flags are retained in the trace). min_subreddits is an optional extra
// dispersion requirement; 0 disables it.
freq_gate_stats freq_gate(std::vector<token_type>& tokens, std::uint64_t threshold,
                          std::uint32_t min_subreddits = 0);

}  // namespace neolog
