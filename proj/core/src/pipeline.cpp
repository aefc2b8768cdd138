#include "neolog/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "neolog/classify.hpp"
#include "neolog/freq.hpp"
#include "neolog/lang.hpp"
#include "neolog/pattern.hpp"
#include "neolog/spell.hpp"
#include "neolog/vocab.hpp"

namespace neolog {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view stage_display_name(stage s) {
    switch (s) {
        case stage::tokenize: return "Tokenization";
        case stage::vocab: return "Vocabulary lookup";
        case stage::pattern: return "Pattern cleaning";
        case stage::concat: return "Concatenation detection";
        case stage::typo: return "Typo detection";
        case stage::freq: return "Freq. threshold + reintegration";
        case stage::lang: return "Foreign language detection";
        case stage::vote: return "Majority vote (NEOLOGISM)";
        case stage::verify: return "Verification";
    }
    return "?";
}

// -------- cascade report --------

void cascade_report::validate() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& prev = rows[i - 1];
        const auto& r = rows[i];
        if (r.remaining != prev.remaining - r.removed + r.reintegrated)
            throw std::logic_error(
                "cascade conservation violated at stage `" + r.name + "`: " +
                std::to_string(prev.remaining) + " − " + std::to_string(r.removed) + " + " +
                std::to_string(r.reintegrated) + " ≠ " + std::to_string(r.remaining));
    }
}

std::string format_compression(std::uint64_t initial, std::uint64_t final_count) {
    if (final_count == 0) return "∞";
    const auto ratio =
        std::llround(static_cast<double>(initial) / static_cast<double>(final_count));
    return format_count(static_cast<std::uint64_t>(ratio)) + ":1";
}

std::string cascade_report::render_text() const {
    std::ostringstream out;
    out << "Filtering cascade (concatenation is checked before typos; counts are\n"
           "candidates remaining after each stage)\n\n";
    std::size_t name_w = 5;
    for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
    out << "  " << std::left;
    out.width(static_cast<std::streamsize>(name_w));
    out << "Stage";
    out << "  " << std::right;
    out.width(15);
    out << "Remaining";
    out.width(15);
    out << "Removed";
    out.width(15);
    out << "Reintegrated";
    out << "\n";
    for (const auto& r : rows) {
        out << "  " << std::left;
        out.width(static_cast<std::streamsize>(name_w));
        out << r.name;
        out << "  " << std::right;
        out.width(15);
        out << format_count(r.remaining);
        out.width(15);
        out << (&r == &rows.front() ? std::string("—") : format_count(r.removed));
        out.width(15);
        out << (r.reintegrated ? format_count(r.reintegrated) : std::string("—"));
        out << "\n";
    }
    out << "\n  Compression ratio: " << format_compression(initial_types(), final_count());
    if (final_count() == 0 && !rows.empty())
        out << "  (warning: final stage is empty, ratio undefined)";
    out << "\n";
    return out.str();
}

std::string cascade_report::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"stage", std::string(stage_id(r.st))},
                          {"name", r.name},
                          {"remaining", r.remaining},
                          {"removed", r.removed},
                          {"reintegrated", r.reintegrated}});
    json j = {{"rows", rows_j},
              {"initial_types", initial_types()},
              {"final", final_count()},
              {"compression", format_compression(initial_types(), final_count())}};
    return j.dump(2);
}

cascade_report cascade_report::from_json(const std::string& text) {
    json j = json::parse(text);
    cascade_report rep;
    for (const auto& r : j.at("rows")) {
        stage_row row;
        row.st = stage_from_id(r.at("stage").get<std::string>());
        row.name = r.at("name").get<std::string>();
        row.remaining = r.at("remaining").get<std::uint64_t>();
        row.removed = r.at("removed").get<std::uint64_t>();
        row.reintegrated = r.at("reintegrated").get<std::uint64_t>();
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

cascade_report cascade_report::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("report not readable: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

cascade_report cascade_report::from_counts_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("counts file not readable: " + path);
    cascade_report rep;
    std::string line;
    std::size_t lineno = 0;
    int next_stage = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto f = split(t, '\t');
        if (f.size() < 2)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected `name<TAB>remaining`");
        stage_row row;
        row.st = next_stage < k_stage_count ? static_cast<stage>(next_stage) : stage::verify;
        ++next_stage;
        row.name = std::string(f[0]);
        std::string digits;
        for (char c : f[1])
            if (c != ',') digits.push_back(c);  // tolerate formatted counts
        row.remaining = std::stoull(digits);
        rep.rows.push_back(std::move(row));
    }
    if (rep.rows.empty()) throw std::runtime_error(path + ": no stage rows");
    return rep;
}

// -------- checkpoint files --------

namespace {

std::string flags_column(const token_type& t) {
    std::string f;
    if (t.flag_typo) f += 'T';
    if (t.flag_concat) f += 'C';
    return f.empty() ? "-" : f;
}

void write_checkpoint(const std::string& path, const std::vector<token_type>& tokens) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
        out << "# surface\tcount\tn_subreddits\tflags\n";
        for (const auto& t : tokens)
            out << t.surface << '\t' << t.count << '\t' << t.subreddit_count() << '\t'
                << flags_column(t) << "\n";
        if (!out) throw std::runtime_error("checkpoint write failed: " + path);
    }
    fs::rename(tmp, path);
}

std::vector<token_type> read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("checkpoint not readable: " + path);
    std::vector<token_type> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto f = split(line, '\t');
        if (f.size() != 4)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 4 tab-separated fields");
        token_type t;
        t.surface = std::string(f[0]);
        t.count = std::stoull(std::string(f[1]));
        t.n_subs = static_cast<std::uint32_t>(std::stoul(std::string(f[2])));
        t.flag_typo = f[3].find('T') != std::string_view::npos;
        t.flag_concat = f[3].find('C') != std::string_view::npos;
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end(),
              [](const token_type& a, const token_type& b) { return a.surface < b.surface; });
    return out;
}

// -------- manifest --------

struct manifest {
    fs::path path;
    json data = json::object();

    static manifest open(const fs::path& workdir) {
        manifest m;
        m.path = workdir / "manifest.json";
        if (fs::exists(m.path)) {
            std::ifstream in(m.path);
            m.data = json::parse(in, nullptr, false);
            if (m.data.is_discarded() || !m.data.is_object()) m.data = json::object();
        }
        if (!m.data.contains("stages") || !m.data["stages"].is_object())
            m.data["stages"] = json::object();
        return m;
    }

    void save() const {
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            out << data.dump(2) << "\n";
            if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
        }
        fs::rename(tmp, path);
    }

    const json* stage_entry(stage s) const {
        const auto& stages = data.at("stages");
        auto it = stages.find(std::string(stage_id(s)));
        return it == stages.end() ? nullptr : &*it;
    }

    void put_stage(stage s, json entry) { data["stages"][std::string(stage_id(s))] = std::move(entry); }
};

std::string checkpoint_name(stage s) {
    return "0" + std::to_string(static_cast<int>(s)) + "-" + std::string(stage_id(s)) + ".tsv";
}

std::string pool_name(stage s) {
    return "0" + std::to_string(static_cast<int>(s)) + "-" + std::string(stage_id(s)) +
           ".pool.tsv";
}

// -------- corpus enumeration --------

std::vector<std::string> corpus_files(const std::string& path) {
    if (path.empty()) throw std::invalid_argument("config: corpus path not set");
    if (!fs::exists(path)) throw std::runtime_error("corpus path does not exist: " + path);
    if (fs::is_regular_file(path)) return {path};
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(path)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        if (!name.empty() && name[0] != '.') files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("corpus directory is empty: " + path);
    return files;
}

// -------- contexts checkpoint --------

using context_map =
    std::unordered_map<std::string, std::vector<context>, string_hash, std::equal_to<>>;

void write_contexts(const std::string& path, const context_map& contexts) {
    std::vector<const std::string*> keys;
    keys.reserve(contexts.size());
    for (const auto& [s, _] : contexts) keys.push_back(&s);
    std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write contexts: " + path);
        for (const auto* s : keys) {
            json ctxs = json::array();
            for (const auto& c : contexts.at(*s))
                ctxs.push_back({{"subreddit", c.subreddit}, {"snippet", c.snippet}});
            out << json{{"surface", *s}, {"contexts", ctxs}}.dump() << "\n";
        }
        if (!out) throw std::runtime_error("contexts write failed: " + path);
    }
    fs::rename(tmp, path);
}

context_map read_contexts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("contexts not readable: " + path);
    context_map out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        auto& lst = out[j.at("surface").get<std::string>()];
        for (const auto& c : j.at("contexts"))
            lst.push_back({c.at("subreddit").get<std::string>(),
                           c.at("snippet").get<std::string>()});
    }
    return out;
}

std::uint64_t contexts_hash(const pipeline_config& cfg) {
    auto h = cfg.stage_hash(stage::lang);
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(cfg.contexts_per_candidate));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(cfg.context_window));
    return h;
}

context_map harvest_for(const pipeline_config& cfg, const std::vector<token_type>& survivors) {
    std::vector<std::string> surfaces;
    surfaces.reserve(survivors.size());
    for (const auto& t : survivors) surfaces.push_back(t.surface);
    const auto stopwords = load_stopwords(cfg.stopwords);
    context_harvester h(surfaces, cfg.contexts_per_candidate, cfg.context_window);
    for (const auto& file : corpus_files(cfg.corpus)) {
        post_reader reader(file);
        post p;
        while (reader.next(p)) {
            h.feed(p, stopwords);
            if (h.saturated()) break;
        }
        if (h.saturated()) break;
    }
    return h.finish();
}

// context checkpoint reuse: hash must match and the file must exist
std::string ensure_contexts_impl(const pipeline_config& cfg, manifest& m,
                                 const std::vector<token_type>& lang_survivors) {
    const fs::path path = fs::path(cfg.workdir) / "contexts.ndjson";
    const std::string want = hex64(contexts_hash(cfg));
    if (auto it = m.data.find("contexts"); it != m.data.end() && it->is_object() &&
                                           it->value("hash", "") == want && fs::exists(path))
        return path.string();
    write_contexts(path.string(), harvest_for(cfg, lang_survivors));
    m.data["contexts"] = {{"hash", want}, {"file", "contexts.ndjson"}};
    m.save();
    return path.string();
}

std::vector<prompt_item> make_prompt_items(const std::vector<token_type>& tokens,
                                           const context_map& contexts, int k) {
    std::vector<prompt_item> items;
    items.reserve(tokens.size());
    for (const auto& t : tokens) {
        prompt_item it;
        it.surface = t.surface;
        if (auto c = contexts.find(t.surface); c != contexts.end()) {
            it.contexts = c->second;
            if (static_cast<int>(it.contexts.size()) > k) it.contexts.resize(k);
        }
        items.push_back(std::move(it));
    }
    return items;
}

}  // namespace

// -------- the orchestrator --------

run_result run_pipeline(const pipeline_config& cfg, const run_options& opts) {
    cfg.validate();
    const stage last = opts.stop_after.value_or(stage::verify);
    fs::create_directories(cfg.workdir);
    auto m = manifest::open(cfg.workdir);

    // longest reusable prefix: every stage whose hash + files survive
    int first_dirty = 0;
    if (!opts.force) {
        for (int i = 0; i <= static_cast<int>(last); ++i) {
            const auto s = static_cast<stage>(i);
            const auto* e = m.stage_entry(s);
            if (!e || e->value("hash", "") != hex64(cfg.stage_hash(s))) break;
            if (!fs::exists(fs::path(cfg.workdir) / checkpoint_name(s))) break;
            if ((s == stage::concat || s == stage::typo) &&
                !fs::exists(fs::path(cfg.workdir) / pool_name(s)))
                break;
            if (s == stage::verify &&
                (!fs::exists(fs::path(cfg.workdir) / "candidates.ndjson") ||
                 !fs::exists(fs::path(cfg.workdir) / "final.tsv")))
                break;
            first_dirty = i + 1;
        }
    }

    run_result result;
    std::vector<token_type> current;
    std::vector<token_type> concat_pool, typo_pool;

    if (first_dirty > 0)
        current = read_checkpoint(
            (fs::path(cfg.workdir) / checkpoint_name(static_cast<stage>(first_dirty - 1)))
                .string());
    // pools are consumed by the freq stage; reload them only when the run
    // resumes in the flagged window
    if (first_dirty > static_cast<int>(stage::concat) &&
        first_dirty <= static_cast<int>(stage::freq))
        concat_pool = read_checkpoint((fs::path(cfg.workdir) / pool_name(stage::concat)).string());
    if (first_dirty > static_cast<int>(stage::typo) &&
        first_dirty <= static_cast<int>(stage::freq))
        typo_pool = read_checkpoint((fs::path(cfg.workdir) / pool_name(stage::typo)).string());

    // shared heavyweight inputs, loaded lazily
    frequency_dict dict;
    bool dict_loaded = false;
    const auto need_dict = [&] {
        if (!dict_loaded) {
            if (cfg.freq_dict.empty())
                throw std::invalid_argument("config: freq_dict is required for the spelling gate");
            dict.load(cfg.freq_dict);
            dict_loaded = true;
        }
    };

    const auto finish_stage = [&](stage s, std::uint64_t removed, std::uint64_t reintegrated,
                                  json extra = json::object()) {
        write_checkpoint((fs::path(cfg.workdir) / checkpoint_name(s)).string(), current);
        json entry = {{"hash", hex64(cfg.stage_hash(s))},
                      {"file", checkpoint_name(s)},
                      {"remaining", current.size()},
                      {"removed", removed},
                      {"reintegrated", reintegrated}};
        for (auto& [k, v] : extra.items()) entry[k] = v;
        m.put_stage(s, std::move(entry));
        m.save();
    };

    for (int i = first_dirty; i <= static_cast<int>(last); ++i) {
        switch (static_cast<stage>(i)) {
            case stage::tokenize: {
                const auto stopwords = load_stopwords(cfg.stopwords);
                type_counter counter;
                reader_stats agg;
                for (const auto& file : corpus_files(cfg.corpus)) {
                    post_reader reader(file);
                    post p;
                    while (reader.next(p)) counter.add(p, stopwords);
                    agg.yielded += reader.stats().yielded;
                    agg.filtered += reader.stats().filtered;
                    agg.malformed += reader.stats().malformed;
                }
                result.reader = agg;
                current = counter.finish();
                m.data["reader"] = {{"posts", agg.yielded},
                                    {"filtered", agg.filtered},
                                    {"malformed", agg.malformed}};
                finish_stage(stage::tokenize, 0, 0);
                break;
            }
            case stage::vocab: {
                vocabulary_set vocab;
                if (!cfg.vocab_manifest.empty()) vocab.load_manifest(cfg.vocab_manifest);
                const auto before = current.size();
                std::erase_if(current,
                              [&](const token_type& t) { return vocab.is_known(t.surface); });
                finish_stage(stage::vocab, before - current.size(), 0);
                break;
            }
            case stage::pattern: {
                auto rules = pattern_rule_set::load(cfg.rulepack);
                rules.min_len = cfg.min_len;
                rules.max_len = cfg.max_len;
                rules.spam_len = cfg.spam_len;
                rules.spam_unique_max = cfg.spam_unique_max;
                rules.entropy_min = cfg.entropy_min;
                rules.entropy_min_len = cfg.entropy_min_len;
                const auto before = current.size();
                std::erase_if(current, [&](const token_type& t) {
                    return !pattern_check(t.surface, rules).pass;
                });
                finish_stage(stage::pattern, before - current.size(), 0);
                break;
            }
            case stage::concat: {
                need_dict();
                concat_pool.clear();
                std::vector<token_type> kept;
                kept.reserve(current.size());
                for (auto& t : current) {
                    auto v = segment(t.surface, dict, cfg.concat_min_len, cfg.concat_min_part);
                    if (v.kind == spell_kind::concat) {
                        t.flag_concat = true;
                        std::string parts;
                        for (const auto& s : v.segments) {
                            if (!parts.empty()) parts += '+';
                            parts += s;
                        }
                        t.trace.push_back({stage::concat, "flagged:" + parts});
                        concat_pool.push_back(std::move(t));
                    } else {
                        kept.push_back(std::move(t));
                    }
                }
                const auto removed = concat_pool.size();
                current = std::move(kept);
                write_checkpoint((fs::path(cfg.workdir) / pool_name(stage::concat)).string(),
                                 concat_pool);
                finish_stage(stage::concat, removed, 0,
                             {{"pool", pool_name(stage::concat)}, {"pool_rows", removed}});
                break;
            }
            case stage::typo: {
                need_dict();
                delete_index index(dict, cfg.max_edit);
                typo_pool.clear();
                std::vector<token_type> kept;
                kept.reserve(current.size());
                for (auto& t : current) {
                    auto v =
                        typo_check(t.surface, index, dict, cfg.typo_min_len, cfg.typo_freq_floor);
                    if (v.kind == spell_kind::typo) {
                        t.flag_typo = true;
                        t.trace.push_back({stage::typo, "flagged:" + v.correction + "@" +
                                                            std::to_string(v.distance)});
                        typo_pool.push_back(std::move(t));
                    } else {
                        kept.push_back(std::move(t));
                    }
                }
                const auto removed = typo_pool.size();
                current = std::move(kept);
                write_checkpoint((fs::path(cfg.workdir) / pool_name(stage::typo)).string(),
                                 typo_pool);
                finish_stage(stage::typo, removed, 0,
                             {{"pool", pool_name(stage::typo)}, {"pool_rows", removed}});
                break;
            }
            case stage::freq: {
                std::vector<token_type> merged = std::move(current);
                merged.insert(merged.end(), std::make_move_iterator(concat_pool.begin()),
                              std::make_move_iterator(concat_pool.end()));
                merged.insert(merged.end(), std::make_move_iterator(typo_pool.begin()),
                              std::make_move_iterator(typo_pool.end()));
                concat_pool.clear();
                typo_pool.clear();
                const auto st = freq_gate(merged, cfg.freq_threshold, cfg.min_subreddits);
                std::sort(merged.begin(), merged.end(), [](const token_type& a, const token_type& b) {
                    return a.surface < b.surface;
                });
                current = std::move(merged);
                finish_stage(stage::freq, st.dropped_low_clean, st.reintegrated(),
                             {{"dropped_low_flagged", st.dropped_low_flagged},
                              {"reintegrated_typo", st.reintegrated_typo},
                              {"reintegrated_concat", st.reintegrated_concat}});
                break;
            }
            case stage::lang: {
                ngram_detector det(cfg.lang_target);
                const auto loaded = det.load_profiles(cfg.lang_profiles, cfg.lang_inventory);
                if (loaded.empty())
                    std::fprintf(stderr,
                                 "lang: no profiles found under %s — every token passes\n",
                                 cfg.lang_profiles.c_str());
                const auto st = lang_gate(current, det, cfg.lang_confidence);
                finish_stage(stage::lang, st.removed, 0,
                             {{"profiles", json(loaded)}});
                break;
            }
            case stage::vote: {
                const auto ctx_path = ensure_contexts_impl(cfg, m, current);
                const auto contexts = read_contexts(ctx_path);
                const auto items =
                    make_prompt_items(current, contexts, cfg.contexts_per_candidate);
                if (cfg.voters.empty())
                    throw std::invalid_argument(
                        "config: no voter endpoints configured for the classification stage");
                classify_config ccfg;
                ccfg.batch_size = cfg.batch_size;
                ccfg.checkpoint_path = (fs::path(cfg.workdir) / "results.ndjson").string();
                const auto votes = classify_all(items, cfg.voters, ccfg);
                std::vector<std::string> voter_names;
                for (const auto& v : cfg.voters) voter_names.push_back(v.name);
                const auto classed = assemble(items, votes, voter_names, {}, false);
                std::unordered_set<std::string, string_hash, std::equal_to<>> winners;
                for (const auto& c : classed)
                    if (c.majority == label::neologism) winners.insert(c.surface);
                const auto before = current.size();
                std::erase_if(current, [&](const token_type& t) {
                    return !winners.contains(t.surface);
                });
                for (auto& t : current) t.trace.push_back({stage::vote, "majority:NEOLOGISM"});
                finish_stage(stage::vote, before - current.size(), 0);
                break;
            }
            case stage::verify: {
                // the export needs every candidate that entered the vote
                const auto lang_survivors = read_checkpoint(
                    (fs::path(cfg.workdir) / checkpoint_name(stage::lang)).string());
                const auto ctx_path = ensure_contexts_impl(cfg, m, lang_survivors);
                const auto contexts = read_contexts(ctx_path);
                const auto all_items =
                    make_prompt_items(lang_survivors, contexts, cfg.contexts_per_candidate);

                classify_config ccfg;
                ccfg.batch_size = cfg.batch_size;
                ccfg.checkpoint_path = (fs::path(cfg.workdir) / "results.ndjson").string();

                // votes come straight off the results checkpoint
                vote_table votes;
                std::unordered_set<std::string, string_hash, std::equal_to<>> voter_set;
                std::vector<std::string> voter_names;
                for (const auto& v : cfg.voters) {
                    voter_names.push_back(v.name);
                    voter_set.insert(v.name);
                }
                for (const auto& r : load_vote_checkpoint(ccfg.checkpoint_path))
                    if (voter_set.contains(r.endpoint)) votes[r.surface][r.endpoint] = r.lab;

                verifier_labels_map vlabels;
                if (cfg.has_verifier) {
                    std::vector<prompt_item> to_verify;
                    std::unordered_set<std::string, string_hash, std::equal_to<>> majority_neo;
                    for (const auto& t : current) majority_neo.insert(t.surface);
                    for (const auto& it : all_items)
                        if (majority_neo.contains(it.surface)) to_verify.push_back(it);
                    vlabels = verify(to_verify, cfg.verifier, ccfg);
                }
                const auto classed =
                    assemble(all_items, votes, voter_names, vlabels, cfg.has_verifier);

                std::unordered_map<std::string, const token_type*, string_hash, std::equal_to<>>
                    by_surface;
                for (const auto& t : lang_survivors) by_surface[t.surface] = &t;

                // candidate export: every classified candidate with its final label
                const fs::path cand_path = fs::path(cfg.workdir) / "candidates.ndjson";
                {
                    const std::string tmp = cand_path.string() + ".tmp";
                    std::ofstream out(tmp, std::ios::trunc);
                    if (!out)
                        throw std::runtime_error("cannot write " + cand_path.string());
                    for (const auto& c : classed) {
                        const auto* t = by_surface.at(c.surface);
                        json votes_j = json::object();
                        for (const auto& [name, l] : c.votes)
                            votes_j[name] = std::string(to_string(l));
                        json ctxs = json::array();
                        if (auto it = contexts.find(c.surface); it != contexts.end())
                            for (const auto& ctx : it->second)
                                ctxs.push_back({{"subreddit", ctx.subreddit},
                                                {"snippet", ctx.snippet}});
                        json rec = {{"surface", c.surface},
                                    {"count", t->count},
                                    {"n_subreddits", t->subreddit_count()},
                                    {"contexts", ctxs},
                                    {"votes", votes_j},
                                    {"majority", std::string(to_string(c.majority))},
                                    {"majority_raw", std::string(to_string(c.majority_raw))},
                                    {"final", std::string(to_string(c.final))}};
                        if (c.verifier) rec["verifier"] = std::string(to_string(*c.verifier));
                        if (c.unverified) rec["unverified"] = true;
                        out << rec.dump() << "\n";
                    }
                    if (!out) throw std::runtime_error("write failed: " + cand_path.string());
                    fs::rename(tmp, cand_path);
                }

                // survivors: majority NEOLOGISM whose verification confirmed
                // (NEOLOGISM or ENTITY) or never ran
                std::unordered_map<std::string, label, string_hash, std::equal_to<>> final_of;
                std::unordered_set<std::string, string_hash, std::equal_to<>> survivors;
                for (const auto& c : classed) {
                    if (c.majority != label::neologism) continue;
                    const bool keep = !c.verifier
                                          ? true
                                          : (*c.verifier == label::neologism ||
                                             *c.verifier == label::entity);
                    if (keep) {
                        survivors.insert(c.surface);
                        final_of[c.surface] = c.final;
                    }
                }
                const auto before = current.size();
                std::erase_if(current, [&](const token_type& t) {
                    return !survivors.contains(t.surface);
                });
                for (auto& t : current) t.trace.push_back({stage::verify, "final"});

                const fs::path final_path = fs::path(cfg.workdir) / "final.tsv";
                {
                    const std::string tmp = final_path.string() + ".tmp";
                    std::ofstream out(tmp, std::ios::trunc);
                    out << "# surface\tcount\tn_subreddits\tfinal\n";
                    for (const auto& t : current)
                        out << t.surface << '\t' << t.count << '\t' << t.subreddit_count() << '\t'
                            << to_string(final_of.at(t.surface)) << "\n";
                    if (!out) throw std::runtime_error("write failed: " + final_path.string());
                    fs::rename(tmp, final_path);
                }
                finish_stage(stage::verify, before - current.size(), 0);
                break;
            }
        }
    }

    // report over the fresh prefix
    cascade_report rep;
    for (int i = 0; i <= static_cast<int>(last); ++i) {
        const auto s = static_cast<stage>(i);
        const auto* e = m.stage_entry(s);
        if (!e) throw std::logic_error("manifest missing stage entry after run");
        stage_row row;
        row.st = s;
        row.name = std::string(stage_display_name(s));
        row.remaining = e->value("remaining", std::uint64_t{0});
        row.removed = e->value("removed", std::uint64_t{0});
        row.reintegrated = e->value("reintegrated", std::uint64_t{0});
        rep.rows.push_back(std::move(row));
    }
    rep.validate();
    {
        std::ofstream out(fs::path(cfg.workdir) / "report.json", std::ios::trunc);
        out << rep.to_json() << "\n";
        std::ofstream txt(fs::path(cfg.workdir) / "report.txt", std::ios::trunc);
        txt << rep.render_text();
    }
    result.report = std::move(rep);
    if (last == stage::verify) {
        result.candidates_path = (fs::path(cfg.workdir) / "candidates.ndjson").string();
        result.final_path = (fs::path(cfg.workdir) / "final.tsv").string();
    }
    return result;
}

std::string ensure_contexts(const pipeline_config& cfg) {
    run_options opts;
    opts.stop_after = stage::lang;
    run_pipeline(cfg, opts);
    auto m = manifest::open(cfg.workdir);
    const auto survivors =
        read_checkpoint((fs::path(cfg.workdir) / checkpoint_name(stage::lang)).string());
    return ensure_contexts_impl(cfg, m, survivors);
}

void export_candidates_tsv(const std::string& candidates_ndjson, const std::string& out_path) {
    std::ifstream in(candidates_ndjson);
    if (!in) throw std::runtime_error("candidates not readable: " + candidates_ndjson);
    std::vector<json> rows;
    std::vector<std::string> voter_names;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(json::parse(line));
        if (voter_names.empty())
            for (const auto& [name, _] : rows.back().at("votes").items())
                voter_names.push_back(name);
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "surface\tcount\tn_subreddits";
    for (const auto& v : voter_names) out << '\t' << "vote:" << v;
    out << "\tmajority\tverifier\tfinal\n";
    for (const auto& r : rows) {
        out << r.at("surface").get<std::string>() << '\t' << r.at("count").get<std::uint64_t>()
            << '\t' << r.at("n_subreddits").get<std::uint64_t>();
        for (const auto& v : voter_names) {
            out << '\t';
            if (r.at("votes").contains(v)) out << r.at("votes").at(v).get<std::string>();
        }
        out << '\t' << r.at("majority").get<std::string>() << '\t'
            << (r.contains("verifier") ? r.at("verifier").get<std::string>() : std::string("—"))
            << '\t' << r.at("final").get<std::string>() << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + out_path);
}

}  // namespace neolog
