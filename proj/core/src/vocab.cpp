#include "neolog/vocab.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace neolog {

void vocabulary_set::insert(std::string_view surface) {
    entries_.emplace(to_lower_ascii(surface));
}

vocab_source_stats vocabulary_set::add_source(const std::string& name, const std::string& path,
                                              const std::string& cutoff) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("vocabulary source not readable: " + path);

    vocab_source_stats st;
    st.name = name;
    st.path = path;
    st.cutoff = cutoff;

    std::string line;
    std::size_t warned = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!valid_utf8(line)) {
            ++st.skipped;
            if (warned < 5) {
                std::fprintf(stderr, "vocab: %s: skipping non-UTF-8 line %zu\n", path.c_str(),
                             st.lines + st.skipped);
                ++warned;
            }
            continue;
        }
        if (line.find_first_of(" \t") != std::string::npos) {
            ++st.skipped;  // multi-word entry, not a token type
            continue;
        }
        ++st.lines;
        if (entries_.emplace(to_lower_ascii(line)).second) ++st.added;
    }
    sources_.push_back(st);
    return st;
}

void vocabulary_set::load_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("vocabulary manifest not readable: " + manifest_path);
    const auto base = std::filesystem::path(manifest_path).parent_path();

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = split(t, '\t');
        if (fields.size() < 2 || fields.size() > 3)
            throw std::runtime_error(manifest_path + ":" + std::to_string(lineno) +
                                     ": expected `name<TAB>path[<TAB>cutoff]`");
        std::filesystem::path p{std::string(fields[1])};
        if (p.is_relative()) p = base / p;
        add_source(std::string(fields[0]), p.string(),
                   fields.size() == 3 ? std::string(fields[2]) : "");
    }
}

}  // namespace neolog
