#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neolog/client.hpp"
#include "neolog/corpus.hpp"

namespace neolog {

// Every default below is the documented operating point of the reference
// run; `run` with no overrides reproduces that instantiation.
struct pipeline_config {
    // inputs
    std::string corpus;          // file or directory of ndjson[.gz|.zst]
    std::string workdir = "work";  // checkpoints, reports, exports
    std::string stopwords = "data/stopwords/en.txt";
    std::string rulepack = "data/rulepacks/en.rules";
    std::string vocab_manifest;  // name \t path \t cutoff
    std::string freq_dict;       // surface \t count
    std::string lang_profiles = "data/lang_profiles";
    std::string cutoff_date = "2015-01-01";

    // pattern cleaning
    int min_len = 3;
    int max_len = 20;
    int spam_len = 6;
    int spam_unique_max = 2;
    double entropy_min = 2.0;
    int entropy_min_len = 7;

    // spelling gate
    int max_edit = 2;
    int typo_min_len = 5;
    std::uint64_t typo_freq_floor = 100;
    int concat_min_len = 6;
    int concat_min_part = 3;

    // frequency gate
    std::uint64_t freq_threshold = 100;
    std::uint32_t min_subreddits = 0;  // optional dispersion hook, 0 = off

    // language gate
    std::string lang_target = "en";
    double lang_confidence = 0.75;
    std::vector<std::string> lang_inventory;  // default: 47 codes

    // classifier
    int batch_size = 10;
    int contexts_per_candidate = 3;
    int context_window = 120;
    std::vector<endpoint_config> voters;
    bool has_verifier = false;
    endpoint_config verifier;

    pipeline_config();  // fills lang_inventory with the default 47 codes

    // flat `key value`/`key=value` file; unknown keys are fatal
    static pipeline_config load(const std::string& path);
    // NEOLOG_<KEY> environment overrides (dots become underscores)
    void apply_env();
    // single `key=value` override (CLI --set); throws on unknown key
    void set(const std::string& key, const std::string& value);
    void validate() const;  // throws std::invalid_argument

    // chained per-stage digest: stage i's hash folds stage i−1's hash with
    // the keys stage i actually reads, so editing a knob invalidates that
    // stage and everything downstream, nothing upstream.
    std::uint64_t stage_hash(stage s) const;
};

std::vector<std::string> default_lang_inventory();

}  // namespace neolog
