#pragma once

#include <regex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "neolog/util.hpp"

namespace neolog {

// Reject reasons, in evaluation order.
enum class pattern_rule {
  alphabetic,
  length,
  spam,
  repetition,
  entropy,
  prefix,
  cluster,
  expressive,
  placeholder,
};

std::string_view to_string(pattern_rule r);

struct pattern_decision {
  bool pass = false;
  pattern_rule reason = pattern_rule::alphabetic;  // meaningful only when !pass
};

// Structural noise rules. The language-independent knobs are numeric; the
// language-specific lists (prefixes, cluster/expressive regexes, placeholder
// words) come from a rule pack file and can be swapped per language.
struct pattern_rule_set {
  std::string language = "en";
  int min_len = 3;
  int max_len = 20;
  int spam_len = 6;  // unique-char spam check applies to tokens longer than this
  int spam_unique_max = 2;
  double entropy_min = 2.0;  // bits
  int entropy_min_len = 7;   // entropy check applies from this length up

  std::vector<std::string> banned_prefixes;
  std::vector<std::string> cluster_sources;     // regex source text
  std::vector<std::string> expressive_sources;  // regex source text
  std::unordered_set<std::string, string_hash, std::equal_to<>> placeholder_words;

  // Compiled from *_sources; call compile() after mutating them.
  std::vector<std::regex> clusters;
  std::vector<std::regex> expressive;

  void compile();

  // Versioned text pack, "neolog-rulepack 1" header. Throws on missing file,
  // bad header, or a regex that does not compile.
  static pattern_rule_set load(const std::string& path);
};

// Shannon entropy in bits over the character distribution of s.
// Throws std::invalid_argument on empty input.
double char_entropy(std::string_view s);

// Applies the rules in fixed order: alphabetic, length, spam, repetition,
// entropy, prefix, cluster, expressive, placeholder. The reported reason is
// the first rule that failed.
pattern_decision pattern_check(std::string_view surface, const pattern_rule_set& rules);

}  // namespace neolog
