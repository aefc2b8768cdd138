#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "neolog/classify.hpp"

namespace neolog {

// ---- inventory annotation ----
// gold file: surface<TAB>label[<TAB>formation_tag], one row per surface

struct gold_record {
    std::string surface;
    label gold = label::none;
    std::string formation;  // optional word-formation tag, e.g. "compound"
};

std::vector<gold_record> load_gold(const std::string& path);

struct gold_summary {
    std::uint64_t n_candidates = 0;  // rows in the final export
    std::uint64_t n_matched = 0;     // rows with a gold label
    std::uint64_t n_missing = 0;     // rows absent from the gold file (excluded)
    std::vector<std::string> missing;

    // by gold label, indexed by label enum order (entity..none)
    std::uint64_t by_gold[4] = {0, 0, 0, 0};
    // cross-tab: [final][gold]
    std::uint64_t cross[4][4] = {};
    // formation tag counts among gold NEOLOGISM rows
    std::vector<std::pair<std::string, std::uint64_t>> formations;

    std::uint64_t lexical_innovation() const;  // NEOLOGISM + ENTITY
    double lexical_innovation_pct() const;
    std::string render_text() const;
};

gold_summary eval_gold(const std::vector<std::pair<std::string, label>>& final_rows,
                       const std::vector<gold_record>& gold);

// convenience: read `surface ... final` rows from a final.tsv export
std::vector<std::pair<std::string, label>> load_final_tsv(const std::string& path);

// ---- recall against an external reference list ----
// reference file: surface<TAB>year<TAB>source<TAB>status
// status: TP | FN | pre-15 | excl.

enum class recall_status { tp, fn, pre15, excluded };

struct recall_record {
    std::string surface;
    int year = 0;
    std::string source;
    recall_status status = recall_status::excluded;
};

std::vector<recall_record> load_recall_reference(const std::string& path);

struct recall_summary {
    std::uint64_t tp = 0, fn = 0, pre15 = 0, excluded = 0;
    double recall() const;
    // per false negative: surface → display name of removing stage
    std::vector<std::pair<std::string, std::string>> fn_stages;
    std::string render_text() const;
};

// workdir may be empty: recall is computed from the statuses alone and
// the removing stage is reported as unknown
recall_summary eval_recall(const std::vector<recall_record>& reference,
                           const std::string& workdir);

}  // namespace neolog
