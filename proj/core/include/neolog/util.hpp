#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace neolog {

// Transparent hash so string-keyed containers accept string_view lookups.
struct string_hash {
  using is_transparent = void;
  size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

inline bool ascii_lower_alpha(std::string_view s) {
  for (char c : s)
    if (c < 'a' || c > 'z') return false;
  return !s.empty();
}

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);

// Splits on sep, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char sep);

bool valid_utf8(std::string_view s);

uint64_t fnv1a64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t fnv1a64_mix(uint64_t h, uint64_t v);
std::string hex64(uint64_t v);

// 124593754 -> "124,593,754"
std::string format_count(uint64_t n);
// one-decimal percent, round half away from zero: 58.667 -> "58.7%"
std::string format_pct(double pct);

}  // namespace neolog
