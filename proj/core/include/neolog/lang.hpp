#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "neolog/corpus.hpp"
#include "neolog/util.hpp"

namespace neolog {

struct lang_verdict {
    std::string language;
    double confidence = 0.0;  // ∈ [0,1]
};

// Token-level language identification. Implementations must be
// deterministic and safe for concurrent detect() calls.
class language_detector {
  public:
    virtual ~language_detector() = default;
    virtual lang_verdict detect(std::string_view surface) const = 0;
    virtual const std::string& target_language() const = 0;
};

// Character-trigram detector. Each language profile is a smoothed trigram
// distribution over "^word$"-padded byte sequences, trained from seed word
// lists; confidence is the softmax gap between the best and second-best
// language. Tokens under 3 bytes return (target, 0): too short to judge.
class ngram_detector : public language_detector {
  public:
    explicit ngram_detector(std::string target = "en") : target_(std::move(target)) {}

    void train(const std::string& language, const std::vector<std::string>& words);
    void train_file(const std::string& language, const std::string& path);

    // profile files: `neolog-langprofile 1` header, `lang <code>` line,
    // then `trigram<TAB>count` rows
    void save_profile(const std::string& language, const std::string& path) const;
    void load_profile(const std::string& path);  // throws on bad header

    // loads <code>.profile for every inventory code present in dir;
    // returns the codes actually loaded
    std::vector<std::string> load_profiles(const std::string& dir,
                                           const std::vector<std::string>& inventory);

    std::vector<std::string> languages() const;

    lang_verdict detect(std::string_view surface) const override;
    const std::string& target_language() const override { return target_; }

  private:
    struct profile {
        std::unordered_map<std::string, std::uint64_t, string_hash, std::equal_to<>> trigrams;
        std::uint64_t total = 0;
    };
    double score(const profile& p, const std::vector<std::string>& grams) const;

    std::string target_;
    std::unordered_map<std::string, profile, string_hash, std::equal_to<>> profiles_;
};

// Word-table detector: exact lookup into a fixed word → (language,
// confidence) table, unknown words default to (target, 0). The pluggable
// second backend; also the hermetic choice for tests that need scripted
// verdicts.
class table_detector : public language_detector {
  public:
    explicit table_detector(std::string target = "en") : target_(std::move(target)) {}

    void add(std::string_view word, std::string_view language, double confidence);
    void load(const std::string& path);  // TSV: word, language, confidence

    lang_verdict detect(std::string_view surface) const override;
    const std::string& target_language() const override { return target_; }

  private:
    std::string target_;
    std::unordered_map<std::string, lang_verdict, string_hash, std::equal_to<>> table_;
};

struct lang_gate_stats {
    std::uint64_t kept = 0;
    std::uint64_t removed = 0;
};

// Removes a token iff detected language ≠ target AND confidence ≥
// threshold; everything else is retained for the classifier.
lang_gate_stats lang_gate(std::vector<token_type>& tokens, const language_detector& detector,
                          double threshold);

}  // namespace neolog
