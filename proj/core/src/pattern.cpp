#include "neolog/pattern.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace neolog {

std::string_view to_string(pattern_rule r) {
  switch (r) {
    case pattern_rule::alphabetic: return "alphabetic";
    case pattern_rule::length: return "length";
    case pattern_rule::spam: return "spam";
    case pattern_rule::repetition: return "repetition";
    case pattern_rule::entropy: return "entropy";
    case pattern_rule::prefix: return "prefix";
    case pattern_rule::cluster: return "cluster";
    case pattern_rule::expressive: return "expressive";
    case pattern_rule::placeholder: return "placeholder";
  }
  return "?";
}

void pattern_rule_set::compile() {
  clusters.clear();
  expressive.clear();
  for (const auto& src : cluster_sources)
    clusters.emplace_back(src, std::regex::ECMAScript | std::regex::optimize);
  for (const auto& src : expressive_sources)
    expressive.emplace_back(src, std::regex::ECMAScript | std::regex::optimize);
}

pattern_rule_set pattern_rule_set::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rule pack: " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "neolog-rulepack 1")
    throw std::runtime_error("bad rule pack header in " + path);

  pattern_rule_set rules;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    size_t sp = sv.find(' ');
    if (sp == std::string_view::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'key value'");
    std::string_view key = sv.substr(0, sp);
    std::string value(trim(sv.substr(sp + 1)));
    if (value.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty value");

    if (key == "lang") rules.language = value;
    else if (key == "min_len") rules.min_len = std::stoi(value);
    else if (key == "max_len") rules.max_len = std::stoi(value);
    else if (key == "spam_len") rules.spam_len = std::stoi(value);
    else if (key == "spam_unique_max") rules.spam_unique_max = std::stoi(value);
    else if (key == "entropy_min") rules.entropy_min = std::stod(value);
    else if (key == "entropy_min_len") rules.entropy_min_len = std::stoi(value);
    else if (key == "prefix") rules.banned_prefixes.push_back(value);
    else if (key == "cluster") rules.cluster_sources.push_back(value);
    else if (key == "expressive") rules.expressive_sources.push_back(value);
    else if (key == "placeholder") rules.placeholder_words.insert(to_lower_ascii(value));
    else
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" +
                               std::string(key) + "'");
  }
  if (rules.min_len <= 0 || rules.min_len > rules.max_len)
    throw std::runtime_error(path + ": requires 0 < min_len <= max_len");
  if (rules.entropy_min < 0)
    throw std::runtime_error(path + ": entropy_min must be >= 0");
  rules.compile();
  return rules;
}

double char_entropy(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("char_entropy: empty string");
  std::array<uint32_t, 256> freq{};
  for (char c : s) ++freq[static_cast<unsigned char>(c)];
  const double n = static_cast<double>(s.size());
  double h = 0.0;
  for (uint32_t f : freq) {
    if (f == 0) continue;
    const double p = f / n;
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

namespace {

int unique_chars(std::string_view s) {
  std::array<bool, 256> seen{};
  int n = 0;
  for (char c : s) {
    auto& slot = seen[static_cast<unsigned char>(c)];
    if (!slot) {
      slot = true;
      ++n;
    }
  }
  return n;
}

bool has_char_run(std::string_view s, size_t run) {
  size_t cur = 1;
  for (size_t i = 1; i < s.size(); ++i) {
    cur = (s[i] == s[i - 1]) ? cur + 1 : 1;
    if (cur >= run) return true;
  }
  return false;
}

}  // namespace

pattern_decision pattern_check(std::string_view surface, const pattern_rule_set& rules) {
  const auto reject = [](pattern_rule r) { return pattern_decision{false, r}; };

  if (!ascii_lower_alpha(surface)) return reject(pattern_rule::alphabetic);

  const int len = static_cast<int>(surface.size());
  if (len < rules.min_len || len > rules.max_len) return reject(pattern_rule::length);

  if (len > rules.spam_len && unique_chars(surface) <= rules.spam_unique_max)
    return reject(pattern_rule::spam);

  if (has_char_run(surface, 3)) return reject(pattern_rule::repetition);

  if (len >= rules.entropy_min_len && char_entropy(surface) < rules.entropy_min)
    return reject(pattern_rule::entropy);

  for (const auto& p : rules.banned_prefixes)
    if (surface.substr(0, p.size()) == p) return reject(pattern_rule::prefix);

  for (const auto& re : rules.clusters)
    if (std::regex_search(surface.begin(), surface.end(), re)) return reject(pattern_rule::cluster);

  for (const auto& re : rules.expressive)
    if (std::regex_search(surface.begin(), surface.end(), re)) return reject(pattern_rule::expressive);

  if (rules.placeholder_words.count(surface) != 0) return reject(pattern_rule::placeholder);

  return pattern_decision{true, pattern_rule::alphabetic};
}

}  // namespace neolog
