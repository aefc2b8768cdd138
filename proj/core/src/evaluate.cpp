#include "neolog/evaluate.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "neolog/pipeline.hpp"
#include "neolog/util.hpp"

namespace neolog {

namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> read_tsv(const std::string& path, std::size_t min_fields) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("not readable: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line[0] == '#') continue;
        auto f = split(line, '\t');
        if (f.size() < min_fields)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected at least " +
                                     std::to_string(min_fields) + " tab-separated fields");
        rows.emplace_back(f.begin(), f.end());
    }
    return rows;
}

}  // namespace

// ---- gold ----

std::vector<gold_record> load_gold(const std::string& path) {
    std::vector<gold_record> out;
    std::unordered_set<std::string, string_hash, std::equal_to<>> seen;
    for (auto& f : read_tsv(path, 2)) {
        gold_record r;
        r.surface = to_lower_ascii(f[0]);
        if (!seen.insert(r.surface).second)
            throw std::runtime_error(path + ": duplicate gold row for `" + r.surface + "`");
        const auto lab = parse_label(f[1]);
        if (!lab)
            throw std::runtime_error(path + ": bad label `" + f[1] + "` for `" + r.surface + "`");
        r.gold = *lab;
        if (f.size() > 2) r.formation = f[2];
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::pair<std::string, label>> load_final_tsv(const std::string& path) {
    std::vector<std::pair<std::string, label>> out;
    for (auto& f : read_tsv(path, 2)) {
        const auto lab = parse_label(f.back());
        if (!lab)
            throw std::runtime_error(path + ": bad final label `" + f.back() + "` for `" + f[0] +
                                     "`");
        out.emplace_back(f[0], *lab);
    }
    return out;
}

std::uint64_t gold_summary::lexical_innovation() const {
    return by_gold[static_cast<int>(label::neologism)] + by_gold[static_cast<int>(label::entity)];
}

double gold_summary::lexical_innovation_pct() const {
    return n_matched ? 100.0 * static_cast<double>(lexical_innovation()) /
                           static_cast<double>(n_matched)
                     : 0.0;
}

gold_summary eval_gold(const std::vector<std::pair<std::string, label>>& final_rows,
                       const std::vector<gold_record>& gold) {
    std::unordered_map<std::string, const gold_record*, string_hash, std::equal_to<>> by_surface;
    for (const auto& g : gold) by_surface[g.surface] = &g;

    gold_summary s;
    std::map<std::string, std::uint64_t> formations;
    for (const auto& [surface, final_label] : final_rows) {
        ++s.n_candidates;
        auto it = by_surface.find(to_lower_ascii(surface));
        if (it == by_surface.end()) {
            ++s.n_missing;
            s.missing.push_back(surface);
            continue;
        }
        ++s.n_matched;
        const auto& g = *it->second;
        ++s.by_gold[static_cast<int>(g.gold)];
        ++s.cross[static_cast<int>(final_label)][static_cast<int>(g.gold)];
        if (g.gold == label::neologism && !g.formation.empty()) ++formations[g.formation];
    }
    s.formations.assign(formations.begin(), formations.end());
    std::sort(s.missing.begin(), s.missing.end());
    return s;
}

std::string gold_summary::render_text() const {
    static constexpr label order[4] = {label::neologism, label::entity, label::foreign,
                                       label::none};
    std::ostringstream out;
    out << "Gold annotation summary\n\n";
    out << "  candidates in export: " << format_count(n_candidates) << "\n";
    out << "  matched in gold file: " << format_count(n_matched) << "\n";
    if (n_missing) {
        out << "  missing from gold (excluded): " << format_count(n_missing);
        std::size_t show = std::min<std::size_t>(missing.size(), 10);
        out << "  [";
        for (std::size_t i = 0; i < show; ++i) out << (i ? ", " : "") << missing[i];
        if (missing.size() > show) out << ", …";
        out << "]";
        out << "\n";
    }
    out << "\n  By gold label:\n";
    for (label l : order) {
        const auto n = by_gold[static_cast<int>(l)];
        out << "    " << std::left;
        out.width(10);
        out << to_string(l);
        out << std::right;
        out.width(10);
        out << format_count(n);
        if (n_matched) out << "  (" << format_pct(100.0 * n / n_matched) << ")";
        out << "\n";
    }
    out << "\n  Lexical innovation (NEOLOGISM + ENTITY): " << format_count(lexical_innovation());
    if (n_matched) out << " (" << format_pct(lexical_innovation_pct()) << ")";
    out << "\n  Non-neologism (FOREIGN + NONE): "
        << format_count(by_gold[static_cast<int>(label::foreign)] +
                        by_gold[static_cast<int>(label::none)]);
    if (n_matched)
        out << " ("
            << format_pct(100.0 *
                          (by_gold[static_cast<int>(label::foreign)] +
                           by_gold[static_cast<int>(label::none)]) /
                          n_matched)
            << ")";
    out << "\n";
    if (!formations.empty()) {
        out << "\n  Formation tags among gold neologisms:\n";
        for (const auto& [tag, n] : formations) {
            out << "    " << std::left;
            out.width(16);
            out << tag;
            out << std::right;
            out.width(8);
            out << format_count(n) << "\n";
        }
    }
    // cross-tab only when the export disagrees with gold somewhere
    bool diagonal = true;
    for (int f = 0; f < 4 && diagonal; ++f)
        for (int g = 0; g < 4; ++g)
            if (f != g && cross[f][g]) {
                diagonal = false;
                break;
            }
    if (!diagonal) {
        out << "\n  Final label × gold label:\n";
        out << "    " << std::left;
        out.width(12);
        out << "final\\gold";
        for (label g : order) {
            out << std::right;
            out.width(11);
            out << to_string(g);
        }
        out << "\n";
        for (label f : order) {
            out << "    " << std::left;
            out.width(12);
            out << to_string(f);
            for (label g : order) {
                out << std::right;
                out.width(11);
                out << format_count(cross[static_cast<int>(f)][static_cast<int>(g)]);
            }
            out << "\n";
        }
    }
    return out.str();
}

// ---- recall ----

std::vector<recall_record> load_recall_reference(const std::string& path) {
    std::vector<recall_record> out;
    std::unordered_set<std::string, string_hash, std::equal_to<>> seen;
    for (auto& f : read_tsv(path, 4)) {
        recall_record r;
        r.surface = to_lower_ascii(f[0]);
        if (!seen.insert(r.surface).second)
            throw std::runtime_error(path + ": duplicate reference row for `" + r.surface + "`");
        r.year = std::stoi(f[1]);
        r.source = f[2];
        std::string st = to_lower_ascii(trim(f[3]));
        while (!st.empty() && (st.back() == '.' || st.back() == ' ')) st.pop_back();
        if (st == "tp")
            r.status = recall_status::tp;
        else if (st == "fn")
            r.status = recall_status::fn;
        else if (st == "pre-15" || st == "pre15")
            r.status = recall_status::pre15;
        else if (st == "excl" || st == "excluded")
            r.status = recall_status::excluded;
        else
            throw std::runtime_error(path + ": bad status `" + f[3] + "` for `" + r.surface + "`");
        out.push_back(std::move(r));
    }
    return out;
}

double recall_summary::recall() const {
    return (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}

recall_summary eval_recall(const std::vector<recall_record>& reference,
                           const std::string& workdir) {
    recall_summary s;
    std::vector<const recall_record*> fns;
    for (const auto& r : reference) {
        switch (r.status) {
            case recall_status::tp: ++s.tp; break;
            case recall_status::fn:
                ++s.fn;
                fns.push_back(&r);
                break;
            case recall_status::pre15: ++s.pre15; break;
            case recall_status::excluded: ++s.excluded; break;
        }
    }

    // attribution: the removing stage is the first checkpoint a surface is
    // absent from, after the last one it appears in
    std::unordered_map<std::string, int, string_hash, std::equal_to<>> last_seen;
    bool have_checkpoints = false;
    if (!workdir.empty()) {
        std::unordered_set<std::string, string_hash, std::equal_to<>> wanted;
        for (const auto* r : fns) wanted.insert(r->surface);
        for (int i = 0; i < k_stage_count; ++i) {
            const auto s_i = static_cast<stage>(i);
            const fs::path p = fs::path(workdir) / ("0" + std::to_string(i) + "-" +
                                                    std::string(stage_id(s_i)) + ".tsv");
            std::ifstream in(p);
            if (!in) continue;
            have_checkpoints = true;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                const auto tab = line.find('\t');
                const std::string surface = line.substr(0, tab);
                if (wanted.contains(surface)) last_seen[surface] = i;
            }
        }
    }
    for (const auto* r : fns) {
        std::string where = "unknown";
        if (have_checkpoints) {
            auto it = last_seen.find(r->surface);
            if (it == last_seen.end())
                where = std::string(stage_display_name(stage::tokenize));
            else if (it->second + 1 < k_stage_count)
                where = std::string(stage_display_name(static_cast<stage>(it->second + 1)));
            else
                where = "present in final export";  // marked FN but survived
        }
        s.fn_stages.emplace_back(r->surface, std::move(where));
    }
    std::sort(s.fn_stages.begin(), s.fn_stages.end());
    return s;
}

std::string recall_summary::render_text() const {
    std::ostringstream out;
    out << "Recall against reference list\n\n";
    out << "  in scope (coined in window): " << format_count(tp + fn) << "\n";
    out << "  detected: " << format_count(tp) << "\n";
    out << "  missed:   " << format_count(fn) << "\n";
    out << "  out of scope: " << format_count(pre15) << " earlier coinage, "
        << format_count(excluded) << " excluded\n";
    out << "\n  Recall: " << tp << "/" << (tp + fn) << " = " << format_pct(100.0 * recall())
        << "\n";
    if (!fn_stages.empty()) {
        out << "\n  Missed surfaces by removing stage:\n";
        std::size_t w = 0;
        for (const auto& [surface, _] : fn_stages) w = std::max(w, surface.size());
        for (const auto& [surface, where] : fn_stages) {
            out << "    " << std::left;
            out.width(static_cast<std::streamsize>(w + 2));
            out << surface;
            out << where << "\n";
        }
    }
    return out.str();
}

}  // namespace neolog
