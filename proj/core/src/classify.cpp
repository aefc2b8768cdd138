#include "neolog/classify.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace neolog {

std::string_view to_string(label l) {
    switch (l) {
        case label::entity: return "ENTITY";
        case label::neologism: return "NEOLOGISM";
        case label::foreign: return "FOREIGN";
        case label::none: return "NONE";
        case label::unknown: return "UNKNOWN";
    }
    return "?";
}

std::optional<label> parse_label(std::string_view text) {
    std::string t = to_lower_ascii(trim(text));
    if (t == "entity") return label::entity;
    if (t == "neologism") return label::neologism;
    if (t == "foreign") return label::foreign;
    if (t == "none") return label::none;
    return std::nullopt;
}

// -------- prompt templates --------
// The classification task text ships verbatim; slot markers are replaced
// at render time. prompts/*.template.txt must stay byte-identical to
// these strings (pinned by a test).

namespace {

constexpr std::string_view k_multi_template =
    R"(TASK: Classify each token
into ONE category.

ENTITY - Pure proper nouns only
  (real/fictional): people, characters,
  companies, brands, products, games,
  movies, places, apps
  Examples: elon, pikachu, google,
  iphone, fortnite, reddit, tokyo

NEOLOGISM - New English words, slang,
  OR words derived from proper nouns
  Examples: doomscrolling, ghosting,
  rizz, bussin, adulting, covidiot,
  youtuber, redditor, trumpian,
  instagrammable, uberize, googlable

FOREIGN - Non-English words
  Examples: além, anspielung,
  yapmyorum, además

NONE - Usernames, typos, programming
  terms, unclear words

CRITICAL RULES:
1. Derived forms are NEOLOGISM
   (youtuber -> NEOLOGISM,
    youtube -> ENTITY)
2. When uncertain, classify as NONE
3. Use the context and subreddit
   to understand usage

TOKENS:
{{TOKEN_BLOCKS}}

OUTPUT:
One classification per line as
TOKEN:LABEL (ENTITY, NEOLOGISM,
FOREIGN, or NONE).
No explanations.
)";

constexpr std::string_view k_single_template =
    R"(Classify this token into ONE
category: ENTITY, NEOLOGISM,
FOREIGN, or NONE.

ENTITY - Pure proper nouns only
  (real/fictional): people,
  characters, companies, brands,
  products, games, movies, places,
  apps
NEOLOGISM - New English words, slang,
  OR words derived from proper nouns
  (youtuber, trumpian,
   instagrammable)
FOREIGN - Non-English words
NONE - Usernames, typos, programming
  terms, unclear words

{{TOKEN_BLOCK}}

Answer with ONLY the label:
{{TOKEN}}:LABEL
)";

std::string escape_context(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '\\' || c == '"') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string token_block(const prompt_item& item) {
    std::string out = "TOKEN: " + item.surface + "\n";
    int n = 0;
    for (const auto& ctx : item.contexts) {
        ++n;
        out += "  context_" + std::to_string(n) + " (r/" + ctx.subreddit + "): \"" +
               escape_context(ctx.snippet) + "\"\n";
    }
    return out;
}

std::string replace_once(std::string text, std::string_view slot, std::string_view value) {
    const auto pos = text.find(slot);
    if (pos == std::string::npos)
        throw std::logic_error("prompt template is missing slot " + std::string(slot));
    text.replace(pos, slot.size(), value);
    return text;
}

}  // namespace

std::string_view multi_template() { return k_multi_template; }
std::string_view single_template() { return k_single_template; }

std::string render_prompt(const std::vector<prompt_item>& batch, prompt_template tmpl) {
    if (batch.empty()) throw std::invalid_argument("render_prompt: empty batch");
    if (tmpl == prompt_template::single) {
        if (batch.size() != 1)
            throw std::invalid_argument("render_prompt: SINGLE template takes exactly one token");
        std::string block = token_block(batch[0]);
        if (!block.empty() && block.back() == '\n') block.pop_back();
        auto text = replace_once(std::string(k_single_template), "{{TOKEN_BLOCK}}", block);
        return replace_once(std::move(text), "{{TOKEN}}", batch[0].surface);
    }
    std::string blocks;
    for (const auto& item : batch) blocks += token_block(item);
    if (!blocks.empty() && blocks.back() == '\n') blocks.pop_back();
    return replace_once(std::string(k_multi_template), "{{TOKEN_BLOCKS}}", blocks);
}

std::unordered_map<std::string, label, string_hash, std::equal_to<>> parse_response(
    std::string_view text, const std::vector<std::string>& expected) {
    std::unordered_set<std::string, string_hash, std::equal_to<>> want;
    for (const auto& e : expected) want.emplace(to_lower_ascii(e));

    std::unordered_map<std::string, label, string_hash, std::equal_to<>> out;
    std::istringstream ss{std::string(text)};
    std::string line;
    while (std::getline(ss, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string surface = to_lower_ascii(trim(line.substr(0, colon)));
        if (!want.contains(surface) || out.contains(surface)) continue;
        if (auto l = parse_label(line.substr(colon + 1))) out.emplace(std::move(surface), *l);
    }
    return out;
}

label majority_vote(const std::vector<label>& votes) {
    int counts[5] = {0, 0, 0, 0, 0};
    for (auto v : votes) ++counts[static_cast<int>(v)];
    for (int i = 0; i < 5; ++i)
        if (counts[i] * 2 > static_cast<int>(votes.size()))
            return static_cast<label>(i);
    return label::unknown;
}

label resolve_tie(label l) { return l == label::unknown ? label::none : l; }

// -------- checkpointed endpoint querying --------

namespace {

using nlohmann::json;

class checkpoint_sink {
  public:
    explicit checkpoint_sink(const std::string& path) {
        if (path.empty()) return;
        out_.open(path, std::ios::app);
        if (!out_) throw std::runtime_error("cannot open results checkpoint: " + path);
    }

    void append(const vote_record& r) {
        std::lock_guard lk(mu_);
        records_.push_back(r);
        if (!out_.is_open()) return;
        json j = {
            {"surface", r.surface},
            {"endpoint", r.endpoint},
            {"label", std::string(to_string(r.lab))},
            {"template", r.template_used},
            {"raw_hash", r.raw_hash},
        };
        if (r.parse_fail) j["parse_fail"] = true;
        out_ << j.dump() << "\n";
        out_.flush();  // a crashed run must find every completed row
    }

    std::vector<vote_record> take() {
        std::lock_guard lk(mu_);
        return std::move(records_);
    }

  private:
    std::mutex mu_;
    std::ofstream out_;
    std::vector<vote_record> records_;
};

std::vector<std::string> surfaces_of(const std::vector<prompt_item>& batch) {
    std::vector<std::string> out;
    out.reserve(batch.size());
    for (const auto& it : batch) out.push_back(it.surface);
    return out;
}

// One endpoint's full pass over its pending candidates: MULTI batches,
// one SINGLE retry per parse failure, NONE afterwards.
void run_endpoint(const endpoint_config& ep, const std::vector<prompt_item>& pending,
                  int batch_size, checkpoint_sink& sink) {
    if (pending.empty()) return;
    auto client = make_client(ep);
    token_bucket bucket(std::max(1.0, ep.requests_per_minute / 6.0),
                        ep.requests_per_minute / 60.0);

    for (std::size_t at = 0; at < pending.size(); at += batch_size) {
        const std::size_t n = std::min<std::size_t>(batch_size, pending.size() - at);
        const std::vector<prompt_item> batch(pending.begin() + at, pending.begin() + at + n);

        chat_request req;
        req.prompt = render_prompt(batch, prompt_template::multi);
        req.model = ep.model;
        auto resp = complete_with_retry(*client, ep, req, bucket);
        if (!resp.ok())
            throw endpoint_down_error("endpoint " + ep.name + " unreachable: " +
                                      (resp.error.empty() ? "HTTP " + std::to_string(resp.http_status)
                                                          : resp.error));
        const auto parsed = parse_response(resp.text, surfaces_of(batch));
        const std::string multi_hash = hex64(fnv1a64(resp.text));

        for (const auto& item : batch) {
            if (auto it = parsed.find(item.surface); it != parsed.end()) {
                sink.append({item.surface, ep.name, it->second, "MULTI", multi_hash, false});
                continue;
            }
            chat_request retry;
            retry.prompt = render_prompt({item}, prompt_template::single);
            retry.model = ep.model;
            auto r2 = complete_with_retry(*client, ep, retry, bucket);
            if (!r2.ok())
                throw endpoint_down_error("endpoint " + ep.name + " unreachable: " +
                                          (r2.error.empty() ? "HTTP " + std::to_string(r2.http_status)
                                                            : r2.error));
            const auto p2 = parse_response(r2.text, {item.surface});
            const std::string h2 = hex64(fnv1a64(r2.text));
            if (auto it = p2.find(item.surface); it != p2.end())
                sink.append({item.surface, ep.name, it->second, "SINGLE", h2, false});
            else
                sink.append({item.surface, ep.name, label::none, "SINGLE", h2, true});
        }
    }
}

std::vector<prompt_item> sorted_unique(const std::vector<prompt_item>& candidates) {
    std::vector<prompt_item> out = candidates;
    std::sort(out.begin(), out.end(),
              [](const prompt_item& a, const prompt_item& b) { return a.surface < b.surface; });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const prompt_item& a, const prompt_item& b) {
                              return a.surface == b.surface;
                          }),
              out.end());
    return out;
}

}  // namespace

std::vector<vote_record> load_vote_checkpoint(const std::string& path) {
    std::vector<vote_record> out;
    if (path.empty()) return out;
    std::ifstream in(path);
    if (!in) return out;  // first run: nothing checkpointed yet
    std::string line;
    std::size_t bad = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("surface") ||
            !j.contains("endpoint") || !j.contains("label")) {
            ++bad;
            continue;
        }
        auto lab = parse_label(j["label"].get<std::string>());
        if (!lab) {
            ++bad;
            continue;
        }
        vote_record r;
        r.surface = j["surface"].get<std::string>();
        r.endpoint = j["endpoint"].get<std::string>();
        r.lab = *lab;
        if (j.contains("template") && j["template"].is_string())
            r.template_used = j["template"].get<std::string>();
        if (j.contains("raw_hash") && j["raw_hash"].is_string())
            r.raw_hash = j["raw_hash"].get<std::string>();
        r.parse_fail = j.value("parse_fail", false);
        out.push_back(std::move(r));
    }
    if (bad)
        std::fprintf(stderr, "checkpoint %s: skipped %zu malformed line(s)\n", path.c_str(), bad);
    return out;
}

vote_table classify_all(const std::vector<prompt_item>& candidates,
                        const std::vector<endpoint_config>& endpoints,
                        const classify_config& cfg) {
    const auto items = sorted_unique(candidates);

    vote_table table;
    checkpoint_sink sink(cfg.checkpoint_path);
    std::unordered_set<std::string, string_hash, std::equal_to<>> done;  // endpoint \x1f surface
    for (const auto& r : load_vote_checkpoint(cfg.checkpoint_path)) {
        done.insert(r.endpoint + '\x1f' + r.surface);
        table[r.surface][r.endpoint] = r.lab;
    }

    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors;
    std::mutex err_mu;
    for (const auto& ep : endpoints) {
        if (ep.role != endpoint_role::voter) continue;
        std::vector<prompt_item> pending;
        for (const auto& it : items)
            if (!done.contains(ep.name + '\x1f' + it.surface)) pending.push_back(it);
        threads.emplace_back([&, ep, pending = std::move(pending)] {
            try {
                run_endpoint(ep, pending, std::max(1, cfg.batch_size), sink);
            } catch (...) {
                std::lock_guard lk(err_mu);
                errors.push_back(std::current_exception());
            }
        });
    }
    for (auto& t : threads) t.join();

    for (const auto& r : sink.take()) table[r.surface][r.endpoint] = r.lab;
    if (!errors.empty()) std::rethrow_exception(errors.front());
    return table;
}

verifier_labels_map verify(const std::vector<prompt_item>& majority_neologisms,
                           const endpoint_config& verifier, const classify_config& cfg) {
    const auto items = sorted_unique(majority_neologisms);

    verifier_labels_map out;
    checkpoint_sink sink(cfg.checkpoint_path);
    std::unordered_set<std::string, string_hash, std::equal_to<>> done;
    for (const auto& r : load_vote_checkpoint(cfg.checkpoint_path)) {
        if (r.endpoint != verifier.name) continue;
        done.insert(r.surface);
        out[r.surface] = r.lab;
    }
    std::vector<prompt_item> pending;
    for (const auto& it : items)
        if (!done.contains(it.surface)) pending.push_back(it);

    try {
        run_endpoint(verifier, pending, std::max(1, cfg.batch_size), sink);
    } catch (const endpoint_down_error& e) {
        // a dead verifier never kills the run — untouched candidates are
        // simply exported unverified
        std::fprintf(stderr, "verifier unreachable, continuing unverified: %s\n", e.what());
    }
    for (const auto& r : sink.take()) out[r.surface] = r.lab;
    return out;
}

std::vector<classification> assemble(const std::vector<prompt_item>& candidates,
                                     const vote_table& votes,
                                     const std::vector<std::string>& voter_names,
                                     const verifier_labels_map& verifier_labels,
                                     bool verifier_configured) {
    std::vector<classification> out;
    for (const auto& item : sorted_unique(candidates)) {
        classification c;
        c.surface = item.surface;
        std::vector<label> ballot;
        const auto row = votes.find(item.surface);
        for (const auto& name : voter_names) {
            label l = label::none;
            if (row != votes.end())
                if (auto it = row->second.find(name); it != row->second.end()) l = it->second;
            c.votes[name] = l;
            ballot.push_back(l);
        }
        c.majority_raw = majority_vote(ballot);
        c.majority = resolve_tie(c.majority_raw);
        if (c.majority == label::neologism) {
            if (auto it = verifier_labels.find(item.surface); it != verifier_labels.end()) {
                c.verifier = it->second;
                c.final = *c.verifier;
            } else {
                c.final = c.majority;
                c.unverified = verifier_configured;
            }
        } else {
            c.final = c.majority;
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace neolog
