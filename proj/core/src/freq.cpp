#include "neolog/freq.hpp"

#include <algorithm>

namespace neolog {

freq_gate_stats freq_gate(std::vector<token_type>& tokens, std::uint64_t threshold,
                          std::uint32_t min_subreddits) {
    freq_gate_stats st;
    std::vector<token_type> kept;
    kept.reserve(tokens.size());
    for (auto& t : tokens) {
        const bool enough =
            t.count >= threshold && (min_subreddits == 0 || t.subreddit_count() >= min_subreddits);
        if (!enough) {
            if (t.flagged())
                ++st.dropped_low_flagged;
            else
                ++st.dropped_low_clean;
            continue;
        }
        if (t.flag_typo) ++st.reintegrated_typo;
        if (t.flag_concat) ++st.reintegrated_concat;
        if (!t.flagged()) ++st.kept_clean;
        t.trace.push_back({stage::freq, t.flagged() ? "reintegrated" : "pass"});
        kept.push_back(std::move(t));
    }
    tokens = std::move(kept);
    return st;
}

}  // namespace neolog
