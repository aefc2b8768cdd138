#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "neolog/util.hpp"

namespace neolog {

// Reference vocabulary: union of surface forms attested before the cutoff
// date. Exact type-level membership, no stemming, no sense disambiguation.
struct vocab_source_stats {
    std::string name;
    std::string path;
    std::string cutoff;        // claimed cutoff date, informational
    std::size_t lines = 0;     // usable lines read
    std::size_t skipped = 0;   // non-UTF-8 or whitespace-containing lines
    std::size_t added = 0;     // entries new to the union
};

class vocabulary_set {
  public:
    // Append one plain-text word list (UTF-8, one surface form per line).
    // Lines with embedded whitespace are ignored (multi-word titles);
    // non-UTF-8 lines are skipped with a warning on stderr.
    // Missing or unreadable file throws std::runtime_error.
    vocab_source_stats add_source(const std::string& name, const std::string& path,
                                  const std::string& cutoff = "");

    // Manifest: tab-separated `name \t path \t cutoff-date` lines, '#' comments.
    // Relative paths resolve against the manifest's directory.
    void load_manifest(const std::string& manifest_path);

    bool is_known(std::string_view surface) const {
        return entries_.contains(surface);
    }

    std::size_t size() const { return entries_.size(); }
    const std::vector<vocab_source_stats>& sources() const { return sources_; }

    // Tests build tiny vocabularies inline.
    void insert(std::string_view surface);

  private:
    std::unordered_set<std::string, string_hash, std::equal_to<>> entries_;
    std::vector<vocab_source_stats> sources_;
};

}  // namespace neolog
