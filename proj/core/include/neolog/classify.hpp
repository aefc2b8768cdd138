#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "neolog/client.hpp"
#include "neolog/corpus.hpp"
#include "neolog/util.hpp"

namespace neolog {

enum class label : std::uint8_t { entity, neologism, foreign, none, unknown };

std::string_view to_string(label l);
// strict: exactly the four public labels, case-insensitive; UNKNOWN is an
// internal tie marker and never parses
std::optional<label> parse_label(std::string_view text);

struct prompt_item {
    std::string surface;
    std::vector<context> contexts;  // ≤ contexts_per_candidate
};

enum class prompt_template : std::uint8_t { multi, single };

// Built-in template text (the copies under prompts/ are the release
// artifacts; a test pins them equal).
std::string_view multi_template();
std::string_view single_template();

// Byte-exact instantiation. Context text is escaped with backslashes
// (\ → \\, " → \") so the quoted form stays parseable.
std::string render_prompt(const std::vector<prompt_item>& batch, prompt_template tmpl);

// Case-insensitive `<surface>:<LABEL>` line matching against the expected
// surfaces; a surface missing from the result map is a parse failure.
std::unordered_map<std::string, label, string_hash, std::equal_to<>> parse_response(
    std::string_view text, const std::vector<std::string>& expected);

// Raw majority: the label held by more than half the votes, else UNKNOWN.
label majority_vote(const std::vector<label>& votes);
// Downstream resolution: UNKNOWN → NONE.
label resolve_tie(label l);

struct classification {
    std::string surface;
    std::map<std::string, label> votes;  // endpoint name → label (ordered for stable output)
    label majority_raw = label::unknown; // may be UNKNOWN on a three-way tie
    label majority = label::none;        // tie-resolved
    std::optional<label> verifier;
    label final = label::none;
    bool unverified = false;  // verifier configured but unreachable
};

// -------- batched endpoint querying --------

struct classify_config {
    int batch_size = 10;
    std::string checkpoint_path;  // append-only NDJSON results file; empty → no persistence
};

struct vote_record {
    std::string surface;
    std::string endpoint;
    label lab = label::none;
    std::string template_used;  // "MULTI" | "SINGLE"
    std::string raw_hash;       // fnv1a64 hex of the raw response text
    bool parse_fail = false;    // NONE assigned after the retry also failed
};

// surface → endpoint → final per-endpoint label
using vote_table = std::unordered_map<std::string, std::unordered_map<std::string, label>,
                                      string_hash, std::equal_to<>>;

std::vector<vote_record> load_vote_checkpoint(const std::string& path);  // missing file → empty

// Thrown when an endpoint stays down through its retry budget; completed
// work is already in the checkpoint, so the run is resumable.
struct endpoint_down_error : std::runtime_error {
    explicit endpoint_down_error(const std::string& what) : std::runtime_error(what) {}
};

// Queries every VOTER endpoint for every candidate (MULTI batches, one
// SINGLE retry per parse failure, NONE after that). Endpoints run on
// their own threads; results append to the checkpoint as they land and
// (endpoint, surface) pairs already present are not re-queried.
vote_table classify_all(const std::vector<prompt_item>& candidates,
                        const std::vector<endpoint_config>& endpoints,
                        const classify_config& cfg);

using verifier_labels_map = std::unordered_map<std::string, label, string_hash, std::equal_to<>>;

// Verification pass over majority-NEOLOGISM candidates with the single
// VERIFIER endpoint; same batching/retry/checkpoint contract, except a
// hard-down verifier does not abort the run: the map simply stays partial
// (or empty) and the untouched candidates end up marked unverified.
verifier_labels_map verify(const std::vector<prompt_item>& majority_neologisms,
                           const endpoint_config& verifier, const classify_config& cfg);

// Deterministic reduction of votes + verifier labels into final
// classifications, sorted by surface. A majority-NEOLOGISM row missing
// from verifier_labels keeps final = majority; it is marked unverified
// when a verifier was configured at all.
std::vector<classification> assemble(const std::vector<prompt_item>& candidates,
                                     const vote_table& votes,
                                     const std::vector<std::string>& voter_names,
                                     const verifier_labels_map& verifier_labels,
                                     bool verifier_configured);

}  // namespace neolog
