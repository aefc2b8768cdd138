#include "neolog/lang.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace neolog {

namespace {

constexpr double k_alpha = 0.1;  // add-α smoothing

std::vector<std::string> padded_trigrams(std::string_view surface) {
    std::string padded;
    padded.reserve(surface.size() + 2);
    padded.push_back('^');
    padded.append(surface);
    padded.push_back('$');
    std::vector<std::string> out;
    if (padded.size() < 3) return out;
    out.reserve(padded.size() - 2);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.emplace_back(padded.substr(i, 3));
    return out;
}

constexpr char k_profile_header[] = "neolog-langprofile 1";

}  // namespace

void ngram_detector::train(const std::string& language, const std::vector<std::string>& words) {
    auto& p = profiles_[language];
    for (const auto& w : words) {
        for (auto& g : padded_trigrams(to_lower_ascii(w))) {
            ++p.trigrams[g];
            ++p.total;
        }
    }
}

void ngram_detector::train_file(const std::string& language, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("seed word list not readable: " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto w = trim(line);
        if (!w.empty() && w[0] != '#') words.emplace_back(w);
    }
    train(language, words);
}

void ngram_detector::save_profile(const std::string& language, const std::string& path) const {
    auto it = profiles_.find(language);
    if (it == profiles_.end())
        throw std::invalid_argument("no profile trained for language: " + language);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write profile: " + path);
    out << k_profile_header << "\n";
    out << "lang " << language << "\n";
    std::vector<const std::string*> keys;
    keys.reserve(it->second.trigrams.size());
    for (const auto& [g, _] : it->second.trigrams) keys.push_back(&g);
    std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
    for (const auto* g : keys) out << *g << '\t' << it->second.trigrams.at(*g) << "\n";
    if (!out) throw std::runtime_error("profile write failed: " + path);
}

void ngram_detector::load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("language profile not readable: " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != k_profile_header)
        throw std::runtime_error(path + ": not a version-1 language profile");
    if (!std::getline(in, line) || line.rfind("lang ", 0) != 0)
        throw std::runtime_error(path + ": missing `lang <code>` line");
    const std::string code{trim(line.substr(5))};
    if (code.empty()) throw std::runtime_error(path + ": empty language code");
    auto& p = profiles_[code];
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected `trigram<TAB>count`");
        std::uint64_t n = 0;
        try {
            n = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad count");
        }
        p.trigrams[line.substr(0, tab)] += n;
        p.total += n;
    }
}

std::vector<std::string> ngram_detector::load_profiles(const std::string& dir,
                                                       const std::vector<std::string>& inventory) {
    std::vector<std::string> loaded;
    for (const auto& code : inventory) {
        const auto path = std::filesystem::path(dir) / (code + ".profile");
        if (!std::filesystem::exists(path)) continue;
        load_profile(path.string());
        loaded.push_back(code);
    }
    return loaded;
}

std::vector<std::string> ngram_detector::languages() const {
    std::vector<std::string> out;
    out.reserve(profiles_.size());
    for (const auto& [code, _] : profiles_) out.push_back(code);
    std::sort(out.begin(), out.end());
    return out;
}

double ngram_detector::score(const profile& p, const std::vector<std::string>& grams) const {
    // log-likelihood under add-α; vocabulary size proxied by profile size + 1
    const double denom =
        static_cast<double>(p.total) + k_alpha * (static_cast<double>(p.trigrams.size()) + 1.0);
    double s = 0.0;
    for (const auto& g : grams) {
        auto it = p.trigrams.find(g);
        const double num = k_alpha + (it == p.trigrams.end() ? 0.0 : static_cast<double>(it->second));
        s += std::log(num / denom);
    }
    return s;
}

lang_verdict ngram_detector::detect(std::string_view surface) const {
    if (surface.size() < 3 || profiles_.empty()) return {target_, 0.0};
    const auto grams = padded_trigrams(to_lower_ascii(surface));

    // deterministic order: sort language codes
    std::vector<std::pair<std::string, double>> scores;
    scores.reserve(profiles_.size());
    for (const auto& [code, p] : profiles_) scores.emplace_back(code, score(p, grams));
    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    if (scores.size() == 1) return {scores[0].first, 1.0};

    const double m = scores[0].second;
    double z = 0.0;
    for (const auto& [_, s] : scores) z += std::exp(s - m);
    const double p1 = 1.0 / z;  // exp(m - m) / z
    const double p2 = std::exp(scores[1].second - m) / z;
    return {scores[0].first, p1 - p2};
}

void table_detector::add(std::string_view word, std::string_view language, double confidence) {
    table_[std::string(word)] = {std::string(language), confidence};
}

void table_detector::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("word table not readable: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = split(t, '\t');
        if (fields.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected `word<TAB>lang<TAB>confidence`");
        add(fields[0], fields[1], std::stod(std::string(fields[2])));
    }
}

lang_verdict table_detector::detect(std::string_view surface) const {
    auto it = table_.find(surface);
    if (it == table_.end()) return {target_, 0.0};
    return it->second;
}

lang_gate_stats lang_gate(std::vector<token_type>& tokens, const language_detector& detector,
                          double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw std::invalid_argument("lang_gate: threshold must be in [0,1]");
    lang_gate_stats st;
    std::vector<token_type> kept;
    kept.reserve(tokens.size());
    const auto& target = detector.target_language();
    for (auto& t : tokens) {
        const auto v = detector.detect(t.surface);
        if (v.language != target && v.confidence >= threshold) {
            ++st.removed;
            continue;
        }
        t.trace.push_back({stage::lang, "pass"});
        kept.push_back(std::move(t));
        ++st.kept;
    }
    tokens = std::move(kept);
    return st;
}

}  // namespace neolog
