#include "neolog/spell.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace neolog {

void frequency_dict::add(std::string_view surface, std::uint64_t count) {
    if (count == 0) throw std::invalid_argument("frequency_dict: zero count");
    entries_[to_lower_ascii(surface)] += count;
    total_ += count;
}

std::uint64_t frequency_dict::count(std::string_view surface) const {
    auto it = entries_.find(surface);
    return it == entries_.end() ? 0 : it->second;
}

void frequency_dict::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("frequency dictionary not readable: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected `surface<TAB>count`");
        std::uint64_t n = 0;
        try {
            n = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad count");
        }
        if (n == 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": count must be ≥ 1");
        add(line.substr(0, tab), n);
    }
}

int osa_distance(std::string_view a, std::string_view b) {
    const int la = static_cast<int>(a.size()), lb = static_cast<int>(b.size());
    if (la == 0) return lb;
    if (lb == 0) return la;
    // three rolling rows: i-2, i-1, i
    std::vector<int> r0(lb + 1), r1(lb + 1), r2(lb + 1);
    for (int j = 0; j <= lb; ++j) r1[j] = j;
    for (int i = 1; i <= la; ++i) {
        r2[0] = i;
        for (int j = 1; j <= lb; ++j) {
            const int sub = r1[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            int best = std::min({r1[j] + 1, r2[j - 1] + 1, sub});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
                best = std::min(best, r0[j - 2] + 1);
            r2[j] = best;
        }
        std::swap(r0, r1);
        std::swap(r1, r2);
    }
    return r1[lb];
}

int osa_distance_bounded(std::string_view a, std::string_view b, int cap) {
    const int la = static_cast<int>(a.size()), lb = static_cast<int>(b.size());
    if (std::abs(la - lb) > cap) return cap + 1;
    if (la == 0) return lb;
    if (lb == 0) return la;
    const int inf = cap + 1;
    std::vector<int> r0(lb + 1, inf), r1(lb + 1, inf), r2(lb + 1, inf);
    for (int j = 0; j <= std::min(lb, cap); ++j) r1[j] = j;
    for (int i = 1; i <= la; ++i) {
        // cells with |i-j| > cap can never come back under cap
        const int jlo = std::max(1, i - cap), jhi = std::min(lb, i + cap);
        std::fill(r2.begin(), r2.end(), inf);
        if (i <= cap) r2[0] = i;
        int row_min = inf;
        for (int j = jlo; j <= jhi; ++j) {
            const int sub = r1[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            int best = std::min({r1[j] + 1, r2[j - 1] + 1, sub});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
                best = std::min(best, r0[j - 2] + 1);
            best = std::min(best, inf);
            r2[j] = best;
            row_min = std::min(row_min, best);
        }
        if (row_min >= inf && (i > cap || r2[0] >= inf)) return inf;
        std::swap(r0, r1);
        std::swap(r1, r2);
    }
    return r1[lb];
}

namespace {

// all variants of s obtainable by ≤ max_del character deletions, s included
void deletion_variants(std::string_view s, int max_del,
                       std::unordered_set<std::string, string_hash, std::equal_to<>>& out) {
    out.emplace(s);
    if (max_del == 0 || s.empty()) return;
    std::string buf;
    buf.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        buf.assign(s.substr(0, i));
        buf.append(s.substr(i + 1));
        if (out.emplace(buf).second && max_del > 1) deletion_variants(buf, max_del - 1, out);
    }
}

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void write_str(std::ofstream& out, std::string_view s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::ifstream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("delete_index: truncated snapshot");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t read_u64(std::ifstream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw std::runtime_error("delete_index: truncated snapshot");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::string read_str(std::ifstream& in) {
    const auto n = read_u32(in);
    if (n > (1u << 20)) throw std::runtime_error("delete_index: implausible string length");
    std::string s(n, '\0');
    if (n && !in.read(s.data(), n)) throw std::runtime_error("delete_index: truncated snapshot");
    return s;
}

constexpr char k_index_header[] = "neolog-delindex 1\n";

}  // namespace

delete_index::delete_index(const frequency_dict& dict, int max_edit) : max_edit_(max_edit) {
    if (max_edit < 1 || max_edit > 2)
        throw std::invalid_argument("delete_index: max_edit must be 1 or 2");
    words_.reserve(dict.size());
    for (const auto& [w, _] : dict.entries()) words_.push_back(w);
    std::sort(words_.begin(), words_.end());  // stable ids across rebuilds

    std::unordered_set<std::string, string_hash, std::equal_to<>> vars;
    for (std::uint32_t id = 0; id < words_.size(); ++id) {
        vars.clear();
        deletion_variants(words_[id], max_edit_, vars);
        for (const auto& v : vars) buckets_[v].push_back(id);
    }
}

std::vector<std::uint32_t> delete_index::candidates(std::string_view surface) const {
    std::unordered_set<std::string, string_hash, std::equal_to<>> vars;
    deletion_variants(surface, max_edit_, vars);
    std::vector<std::uint32_t> out;
    for (const auto& v : vars) {
        auto it = buckets_.find(v);
        if (it == buckets_.end()) continue;
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void delete_index::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("delete_index: cannot write " + path);
    out.write(k_index_header, sizeof(k_index_header) - 1);
    write_u32(out, static_cast<std::uint32_t>(max_edit_));
    write_u64(out, words_.size());
    for (const auto& w : words_) write_str(out, w);
    // sorted for byte-identical snapshots across runs
    std::vector<const std::string*> keys;
    keys.reserve(buckets_.size());
    for (const auto& [k, _] : buckets_) keys.push_back(&k);
    std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
    write_u64(out, keys.size());
    for (const auto* k : keys) {
        write_str(out, *k);
        const auto& ids = buckets_.at(*k);
        write_u32(out, static_cast<std::uint32_t>(ids.size()));
        for (auto id : ids) write_u32(out, id);
    }
    if (!out) throw std::runtime_error("delete_index: write failed for " + path);
}

delete_index delete_index::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("delete_index: cannot read " + path);
    char hdr[sizeof(k_index_header) - 1];
    if (!in.read(hdr, sizeof(hdr)) || std::memcmp(hdr, k_index_header, sizeof(hdr)) != 0)
        throw std::runtime_error("delete_index: " + path + " is not a version-1 index snapshot");
    delete_index idx;
    idx.max_edit_ = static_cast<int>(read_u32(in));
    if (idx.max_edit_ < 1 || idx.max_edit_ > 2)
        throw std::runtime_error("delete_index: corrupt snapshot (max_edit)");
    const auto nwords = read_u64(in);
    idx.words_.reserve(nwords);
    for (std::uint64_t i = 0; i < nwords; ++i) idx.words_.push_back(read_str(in));
    const auto nbuckets = read_u64(in);
    idx.buckets_.reserve(nbuckets);
    for (std::uint64_t i = 0; i < nbuckets; ++i) {
        auto key = read_str(in);
        const auto n = read_u32(in);
        auto& ids = idx.buckets_[std::move(key)];
        ids.reserve(n);
        for (std::uint32_t j = 0; j < n; ++j) {
            const auto id = read_u32(in);
            if (id >= idx.words_.size())
                throw std::runtime_error("delete_index: corrupt snapshot (word id)");
            ids.push_back(id);
        }
    }
    return idx;
}

spell_verdict typo_check(std::string_view surface, const delete_index& index,
                         const frequency_dict& dict, int min_len, std::uint64_t freq_floor) {
    spell_verdict v;
    if (static_cast<int>(surface.size()) < min_len) return v;

    const int cap = index.max_edit();
    int best_d = cap + 1;
    std::uint64_t best_count = 0;
    const std::string* best_word = nullptr;

    for (auto id : index.candidates(surface)) {
        const std::string& w = index.word(id);
        const std::uint64_t c = dict.count(w);
        if (c <= freq_floor) continue;
        const int d = osa_distance_bounded(surface, w, cap);
        if (d < 1 || d > cap) continue;  // d == 0 means surface itself is in dict
        const bool better =
            best_word == nullptr || d < best_d ||
            (d == best_d && (c > best_count || (c == best_count && w < *best_word)));
        if (better) {
            best_d = d;
            best_count = c;
            best_word = &w;
        }
    }
    if (best_word) {
        v.kind = spell_kind::typo;
        v.correction = *best_word;
        v.distance = best_d;
    }
    return v;
}

spell_verdict segment(std::string_view surface, const frequency_dict& dict, int min_len,
                      int min_part) {
    spell_verdict v;
    const int n = static_cast<int>(surface.size());
    if (n < min_len) return v;

    constexpr double k_unset = -std::numeric_limits<double>::infinity();
    const double log_total = std::log(static_cast<double>(dict.total()));
    // best decomposition of the length-i prefix: fewest parts, then highest
    // sum of log relative part frequencies
    std::vector<int> parts(n + 1, -1);
    std::vector<double> score(n + 1, k_unset);
    std::vector<int> back(n + 1, -1);
    parts[0] = 0;
    score[0] = 0.0;

    for (int i = min_part; i <= n; ++i) {
        for (int j = 0; j + min_part <= i; ++j) {
            if (parts[j] < 0) continue;
            if (j == 0 && i == n) continue;  // whole string as one part is not a split
            const auto piece = surface.substr(j, i - j);
            const std::uint64_t c = dict.count(piece);
            if (c == 0) continue;
            const int p = parts[j] + 1;
            const double s = score[j] + (std::log(static_cast<double>(c)) - log_total);
            if (parts[i] < 0 || p < parts[i] || (p == parts[i] && s > score[i])) {
                parts[i] = p;
                score[i] = s;
                back[i] = j;
            }
        }
    }
    if (parts[n] < 2) return v;

    v.kind = spell_kind::concat;
    for (int i = n; i > 0; i = back[i]) v.segments.emplace_back(surface.substr(back[i], i - back[i]));
    std::reverse(v.segments.begin(), v.segments.end());
    return v;
}

}  // namespace neolog
