#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "neolog/util.hpp"

namespace neolog {

struct post {
    std::string id;
    std::string body;
    std::string subreddit;
    std::int64_t created_utc = 0;
};

// Cascade stages in fixed order; trace entries and checkpoints key on these.
enum class stage : std::uint8_t {
    tokenize,
    vocab,
    pattern,
    concat,
    typo,
    freq,
    lang,
    vote,
    verify,
};
std::string_view stage_id(stage s);
stage stage_from_id(std::string_view id);  // throws on unknown id
inline constexpr int k_stage_count = 9;

struct trace_entry {
    stage st;
    std::string decision;
};

struct token_type {
    std::string surface;  // lowercase
    std::uint64_t count = 0;
    std::vector<std::string> subreddits;  // sorted, unique; may be empty after checkpoint reload
    bool flag_typo = false;
    bool flag_concat = false;
    std::vector<trace_entry> trace;

    // checkpoints persist only the cardinality, not the set
    std::uint32_t n_subs = 0;
    std::uint32_t subreddit_count() const {
        return subreddits.empty() ? n_subs : static_cast<std::uint32_t>(subreddits.size());
    }
    bool flagged() const { return flag_typo || flag_concat; }
};

struct context {
    std::string subreddit;
    std::string snippet;
};

using stopword_set = std::unordered_set<std::string, string_hash, std::equal_to<>>;
stopword_set load_stopwords(const std::string& path);  // UTF-8, one word per line

// Replace URLs, r/<sub>, u/<user>, #tags with bracketed placeholders
// (⟦URL⟧ ⟦SUB⟧ ⟦USER⟧ ⟦TAG⟧ — the brackets are non-ASCII on purpose, the
// alphabetic rule downstream removes them), then strip every other
// non-ASCII byte.
std::string preprocess(std::string_view body);

// Lowercased maximal [a-z0-9] runs; placeholder spans are skipped whole;
// stopwords dropped.
std::vector<std::string> tokenize(std::string_view text, const stopword_set& stopwords);

struct token_span {
    std::string surface;
    std::size_t begin = 0;  // byte offsets into the preprocessed text
    std::size_t end = 0;
};
std::vector<token_span> tokenize_spans(std::string_view text, const stopword_set& stopwords);

// New-line-delimited JSON reader. Comments carry `body`; submissions carry
// `title`/`selftext`, ingested as one body. Records whose text is empty,
// "[deleted]" or "[removed]" are filtered; unparseable lines are counted
// and skipped. ".gz" decompresses in-process, ".zst"/".zstd" pipes through
// the zstd binary.
struct reader_stats {
    std::uint64_t yielded = 0;
    std::uint64_t filtered = 0;
    std::uint64_t malformed = 0;
};

class line_source;

class post_reader {
  public:
    explicit post_reader(const std::string& path);  // throws std::runtime_error
    ~post_reader();
    post_reader(post_reader&&) noexcept;
    post_reader& operator=(post_reader&&) noexcept;

    bool next(post& out);  // false at end of stream
    const reader_stats& stats() const { return stats_; }

  private:
    std::unique_ptr<line_source> src_;
    reader_stats stats_;
    std::string path_;
};

// Streaming surface → (count, subreddit set) aggregation. Shardable:
// partial counters merge associatively, result independent of order.
class type_counter {
  public:
    void add(const post& p, const stopword_set& stopwords);
    void add_tokens(const std::vector<std::string>& tokens, std::string_view subreddit);
    void merge(type_counter&& other);

    std::uint64_t total_tokens() const { return total_; }
    std::size_t distinct() const { return map_.size(); }

    // sorted by surface; consumes the counter
    std::vector<token_type> finish();

  private:
    struct agg {
        std::uint64_t count = 0;
        std::vector<std::uint32_t> subs;  // sorted unique intern ids
    };
    std::uint32_t intern(std::string_view sub);

    std::unordered_map<std::string, agg, string_hash, std::equal_to<>> map_;
    std::unordered_map<std::string, std::uint32_t, string_hash, std::equal_to<>> sub_ids_;
    std::vector<std::string> sub_names_;
    std::uint64_t total_ = 0;
};

// Second-pass context harvesting: up to k snippets per candidate, distinct
// subreddits preferred, ±window chars around the first occurrence trimmed
// to whitespace boundaries.
class context_harvester {
  public:
    context_harvester(const std::vector<std::string>& candidates, int k, int window);

    void feed(const post& p, const stopword_set& stopwords);
    bool saturated() const { return remaining_ == 0; }

    // candidate → contexts (≤ k); candidates never seen map to empty lists
    std::unordered_map<std::string, std::vector<context>, string_hash, std::equal_to<>> finish();

  private:
    struct cand_state {
        std::vector<context> picked;
        std::unordered_set<std::string, string_hash, std::equal_to<>> subs_used;
        std::vector<context> backup;
    };
    int k_;
    int window_;
    std::size_t remaining_;  // candidates still short of k picks
    std::unordered_map<std::string, cand_state, string_hash, std::equal_to<>> state_;
};

std::unordered_map<std::string, std::vector<context>, string_hash, std::equal_to<>>
harvest_contexts(const std::vector<post>& posts, const std::vector<std::string>& candidates, int k,
                 int window, const stopword_set& stopwords);

}  // namespace neolog
