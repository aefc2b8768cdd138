#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "neolog/util.hpp"

namespace neolog {

// Frequency dictionary backing both the typo index and the segmenter.
// File format: UTF-8 lines `surface<TAB>count`; duplicate surfaces sum.
class frequency_dict {
  public:
    void add(std::string_view surface, std::uint64_t count);
    void load(const std::string& path);  // throws std::runtime_error

    bool contains(std::string_view surface) const { return entries_.contains(surface); }
    std::uint64_t count(std::string_view surface) const;
    std::uint64_t total() const { return total_; }
    std::size_t size() const { return entries_.size(); }

    const std::unordered_map<std::string, std::uint64_t, string_hash, std::equal_to<>>&
    entries() const {
        return entries_;
    }

  private:
    std::unordered_map<std::string, std::uint64_t, string_hash, std::equal_to<>> entries_;
    std::uint64_t total_ = 0;
};

// Optimal string alignment distance: insert / delete / substitute /
// adjacent transposition, no substring edited twice.
int osa_distance(std::string_view a, std::string_view b);

// Banded variant: returns the exact distance when it is ≤ cap, otherwise
// any value > cap. cap ≥ 0.
int osa_distance_bounded(std::string_view a, std::string_view b, int cap);

enum class spell_kind : std::uint8_t { clean, typo, concat };

struct spell_verdict {
    spell_kind kind = spell_kind::clean;
    std::string correction;            // typo only
    std::vector<std::string> segments; // concat only
    int distance = 0;                  // typo only, ∈ [1, max_edit]
};

// Symmetric-delete index: every dictionary word is bucketed under all of
// its ≤max_edit-deletion variants (itself included). A query generates its
// own variants, unions the buckets, and verifies candidates with the real
// distance — complete for OSA distance ≤ max_edit.
class delete_index {
  public:
    delete_index() = default;
    delete_index(const frequency_dict& dict, int max_edit);

    int max_edit() const { return max_edit_; }
    std::size_t word_count() const { return words_.size(); }
    std::size_t bucket_count() const { return buckets_.size(); }

    // All dictionary words within OSA distance ≤ max_edit of surface
    // (distance 0, i.e. the word itself, included). Unordered.
    std::vector<std::uint32_t> candidates(std::string_view surface) const;

    const std::string& word(std::uint32_t id) const { return words_[id]; }

    // Versioned binary snapshot so large indexes survive across runs.
    void save(const std::string& path) const;
    static delete_index load(const std::string& path);  // throws on mismatch

  private:
    int max_edit_ = 2;
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::vector<std::uint32_t>, string_hash, std::equal_to<>>
        buckets_;
};

// Nearest dictionary word with verified distance ∈ [1, max_edit] and
// count > freq_floor; ties broken by min distance, then higher count,
// then lexicographic. Tokens shorter than min_len are never typos.
spell_verdict typo_check(std::string_view surface, const delete_index& index,
                         const frequency_dict& dict, int min_len, std::uint64_t freq_floor);

// Splits surface into ≥2 dictionary parts, each ≥ min_part chars, if such
// a split exists: fewest parts, ties by highest product of part relative
// frequencies. Tokens shorter than min_len are never concatenations.
spell_verdict segment(std::string_view surface, const frequency_dict& dict, int min_len,
                      int min_part);

}  // namespace neolog
