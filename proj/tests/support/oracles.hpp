#pragma once

// Independent reference implementations the fast-path code is checked
// against. Everything here is deliberately naive: full-matrix distance,
// linear dictionary scans, exhaustive split enumeration. Nothing in this
// file may call into the indexed/DP implementations under test.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "neolog/spell.hpp"

namespace neolog::oracle {

// Full-matrix optimal string alignment distance (insert / delete /
// substitute / adjacent transposition, no substring edited twice).
int osa_reference(std::string_view a, std::string_view b);

struct typo_ref_result {
    bool is_typo = false;
    std::string correction;
    int distance = 0;
};

// Brute-force scan of the whole dictionary: verified OSA distance ∈
// [1, max_edit], dictionary count > freq_floor, best by (min distance,
// then higher count, then lexicographic surface). Tokens shorter than
// min_len are never typos. `pruned` skips pairs that provably cannot be
// within max_edit (see the soundness notes in the .cpp) — same result,
// scan-speed only.
typo_ref_result typo_reference(std::string_view surface, const frequency_dict& dict, int min_len,
                               int max_edit, std::uint64_t freq_floor, bool pruned = true);

struct segment_ref_result {
    bool is_concat = false;
    std::vector<std::string> segments;  // a best split (fewest parts, then
                                        // max product of relative freqs)
    int min_parts = 0;                  // over all valid splits
};

// Exhaustive enumeration of all 2^(n−1) split patterns. A split is valid
// when it has ≥ 2 parts, every part is in dict, and every part is at
// least min_part characters. Tokens shorter than min_len never segment.
segment_ref_result segment_reference(std::string_view surface, const frequency_dict& dict,
                                     int min_len, int min_part);

}  // namespace neolog::oracle
