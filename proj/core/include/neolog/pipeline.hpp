#pragma once

#include <optional>
#include <string>
#include <vector>

#include "neolog/classify.hpp"
#include "neolog/config.hpp"
#include "neolog/corpus.hpp"

namespace neolog {

std::string_view stage_display_name(stage s);

struct stage_row {
    stage st = stage::tokenize;
    std::string name;  // display name, fixed cascade order
    std::uint64_t remaining = 0;
    std::uint64_t removed = 0;
    std::uint64_t reintegrated = 0;
};

// Per-stage survivor counts in cascade order plus the derived
// compression ratio.
struct cascade_report {
    std::vector<stage_row> rows;

    std::uint64_t initial_types() const { return rows.empty() ? 0 : rows.front().remaining; }
    std::uint64_t final_count() const { return rows.empty() ? 0 : rows.back().remaining; }

    //    remaining[i] = remaining[i−1] − removed[i] + reintegrated[i]
    // for every non-initial row; throws std::logic_error on violation
    void validate() const;

    std::string render_text() const;  // human-readable table + ratio line
    std::string to_json() const;
    static cascade_report from_json(const std::string& text);
    static cascade_report from_json_file(const std::string& path);

    // externally recorded counts: `name<TAB>remaining` rows (removed /
    // reintegrated unknown → left 0, conservation not checkable)
    static cascade_report from_counts_file(const std::string& path);
};

// "122,031:1" (rounded to nearest), or "∞" when the final stage is empty
std::string format_compression(std::uint64_t initial, std::uint64_t final_count);

struct run_options {
    std::optional<stage> stop_after;  // default: run the whole cascade
    bool force = false;               // recompute even when checkpoints are valid
};

struct run_result {
    cascade_report report;
    std::string candidates_path;  // candidates.ndjson ("" until the vote stage ran)
    std::string final_path;       // final.tsv survivor list
    reader_stats reader;          // corpus ingest counters (0s on full resume)
};

// The whole cascade with per-stage checkpoints under cfg.workdir; stages
// whose chained config hash and checkpoint file both survive are reloaded
// instead of recomputed, so a config edit reruns only itself and
// everything after it.
run_result run_pipeline(const pipeline_config& cfg, const run_options& opts = {});

// Harvests classification contexts for the language-gate survivors
// (running/reusing earlier stages as needed) and checkpoints them as
// contexts.ndjson. The vote stage calls this internally; the CLI exposes
// it standalone.
std::string ensure_contexts(const pipeline_config& cfg);

// flat TSV for spreadsheet annotation: surface, count, n_subreddits,
// majority, verifier, final, one vote column per endpoint
void export_candidates_tsv(const std::string& candidates_ndjson, const std::string& out_path);

}  // namespace neolog
