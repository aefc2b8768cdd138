#include "neolog/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace neolog {

std::string_view stage_id(stage s) {
    switch (s) {
        case stage::tokenize: return "tokenize";
        case stage::vocab: return "vocab";
        case stage::pattern: return "pattern";
        case stage::concat: return "concat";
        case stage::typo: return "typo";
        case stage::freq: return "freq";
        case stage::lang: return "lang";
        case stage::vote: return "vote";
        case stage::verify: return "verify";
    }
    return "?";
}

stage stage_from_id(std::string_view id) {
    for (int i = 0; i < k_stage_count; ++i)
        if (stage_id(static_cast<stage>(i)) == id) return static_cast<stage>(i);
    throw std::invalid_argument("unknown stage id: " + std::string(id));
}

stopword_set load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("stopword list not readable: " + path);
    stopword_set out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto w = trim(line);
        if (w.empty() || w[0] == '#') continue;
        out.emplace(to_lower_ascii(w));
    }
    return out;
}

// -------- preprocessing --------

namespace {

constexpr std::string_view k_ph_url = "⟦URL⟧";
constexpr std::string_view k_ph_sub = "⟦SUB⟧";
constexpr std::string_view k_ph_user = "⟦USER⟧";
constexpr std::string_view k_ph_tag = "⟦TAG⟧";
constexpr std::string_view k_lbracket = "⟦";
constexpr std::string_view k_rbracket = "⟧";

bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c == '_';
}

bool starts_with_ci(std::string_view s, std::size_t i, std::string_view prefix) {
    if (i + prefix.size() > s.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k)
        if (std::tolower(static_cast<unsigned char>(s[i + k])) != prefix[k]) return false;
    return true;
}

std::size_t skip_url(std::string_view s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    return j;
}

std::size_t skip_word(std::string_view s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && is_word_char(static_cast<unsigned char>(s[j]))) ++j;
    return j;
}

}  // namespace

std::string preprocess(std::string_view body) {
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    const auto word_boundary = [&](std::size_t pos) {
        return pos == 0 || !is_word_char(static_cast<unsigned char>(body[pos - 1]));
    };
    while (i < body.size()) {
        const unsigned char c = static_cast<unsigned char>(body[i]);
        if (starts_with_ci(body, i, "http://") || starts_with_ci(body, i, "https://") ||
            (word_boundary(i) && starts_with_ci(body, i, "www."))) {
            out.append(k_ph_url);
            i = skip_url(body, i);
            continue;
        }
        if ((c == 'r' || c == 'u') && word_boundary(i) && i + 1 < body.size() &&
            body[i + 1] == '/' && i + 2 < body.size() &&
            is_word_char(static_cast<unsigned char>(body[i + 2]))) {
            out.append(c == 'r' ? k_ph_sub : k_ph_user);
            i = skip_word(body, i + 2);
            continue;
        }
        if (c == '#' && i + 1 < body.size() &&
            is_word_char(static_cast<unsigned char>(body[i + 1]))) {
            out.append(k_ph_tag);
            i = skip_word(body, i + 1);
            continue;
        }
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        }
        // non-ASCII byte: dropped
        ++i;
    }
    return out;
}

// -------- tokenization --------

std::vector<token_span> tokenize_spans(std::string_view text, const stopword_set& stopwords) {
    std::vector<token_span> out;
    std::string cur;
    std::size_t cur_begin = 0;
    const auto flush = [&](std::size_t end_pos) {
        if (!cur.empty() && !stopwords.contains(cur))
            out.push_back({cur, cur_begin, end_pos});
        cur.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, k_lbracket.size(), k_lbracket) == 0) {
            flush(i);
            const auto close = text.find(k_rbracket, i + k_lbracket.size());
            i = close == std::string_view::npos ? text.size() : close + k_rbracket.size();
            continue;
        }
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isalnum(c) && c < 0x80) {
            if (cur.empty()) cur_begin = i;
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush(i);
        }
        ++i;
    }
    flush(text.size());
    return out;
}

std::vector<std::string> tokenize(std::string_view text, const stopword_set& stopwords) {
    std::vector<std::string> out;
    for (auto& sp : tokenize_spans(text, stopwords)) out.push_back(std::move(sp.surface));
    return out;
}

// -------- post reader --------

class line_source {
  public:
    virtual ~line_source() = default;
    virtual bool next_line(std::string& out) = 0;
};

namespace {

class plain_line_source : public line_source {
  public:
    explicit plain_line_source(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("corpus file not readable: " + path);
    }
    bool next_line(std::string& out) override {
        if (!std::getline(in_, out)) return false;
        if (!out.empty() && out.back() == '\r') out.pop_back();
        return true;
    }

  private:
    std::ifstream in_;
};

class gzip_line_source : public line_source {
  public:
    explicit gzip_line_source(const std::string& path) : path_(path) {
        gz_ = gzopen(path.c_str(), "rb");
        if (!gz_) throw std::runtime_error("gzip corpus not readable: " + path);
        gzbuffer(gz_, 1 << 17);
    }
    ~gzip_line_source() override {
        if (gz_) gzclose(gz_);
    }
    bool next_line(std::string& out) override {
        out.clear();
        while (true) {
            auto nl = buf_.find('\n', pos_);
            if (nl != std::string::npos) {
                out.append(buf_, pos_, nl - pos_);
                pos_ = nl + 1;
                if (!out.empty() && out.back() == '\r') out.pop_back();
                return true;
            }
            out.append(buf_, pos_, buf_.size() - pos_);
            buf_.clear();
            pos_ = 0;
            char chunk[1 << 16];
            const int n = gzread(gz_, chunk, sizeof(chunk));
            if (n < 0) {
                int err = 0;
                const char* msg = gzerror(gz_, &err);
                throw std::runtime_error("gzip read error in " + path_ + ": " +
                                         (msg ? msg : "unknown"));
            }
            if (n == 0) return !out.empty();  // final unterminated line
            buf_.assign(chunk, static_cast<std::size_t>(n));
        }
    }

  private:
    std::string path_;
    gzFile gz_ = nullptr;
    std::string buf_;
    std::size_t pos_ = 0;
};

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out += "'";
    return out;
}

// zstd is piped through the system binary: the sandbox toolchain has no
// libzstd, and shelling out keeps the dependency optional.
class pipe_line_source : public line_source {
  public:
    explicit pipe_line_source(const std::string& path) : path_(path) {
        if (!std::ifstream(path)) throw std::runtime_error("corpus file not readable: " + path);
        const std::string cmd = "zstd -dc -- " + shell_quote(path) + " 2>/dev/null";
        fp_ = popen(cmd.c_str(), "r");
        if (!fp_) throw std::runtime_error("cannot spawn zstd for " + path);
    }
    ~pipe_line_source() override {
        if (fp_) pclose(fp_);
    }
    bool next_line(std::string& out) override {
        out.clear();
        char chunk[1 << 16];
        while (std::fgets(chunk, sizeof(chunk), fp_)) {
            out.append(chunk);
            if (!out.empty() && out.back() == '\n') {
                out.pop_back();
                if (!out.empty() && out.back() == '\r') out.pop_back();
                return true;
            }
        }
        const int rc = pclose(fp_);
        fp_ = nullptr;
        if (rc != 0)
            throw std::runtime_error(
                "zstd -dc failed for " + path_ +
                " (is the zstd binary installed? alternatively decompress the file manually)");
        return !out.empty();
    }

  private:
    std::string path_;
    FILE* fp_ = nullptr;
};

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

post_reader::post_reader(const std::string& path) : path_(path) {
    if (ends_with(path, ".gz"))
        src_ = std::make_unique<gzip_line_source>(path);
    else if (ends_with(path, ".zst") || ends_with(path, ".zstd"))
        src_ = std::make_unique<pipe_line_source>(path);
    else
        src_ = std::make_unique<plain_line_source>(path);
}

post_reader::~post_reader() = default;
post_reader::post_reader(post_reader&&) noexcept = default;
post_reader& post_reader::operator=(post_reader&&) noexcept = default;

namespace {

bool is_tombstone(std::string_view body) {
    return body == "[deleted]" || body == "[removed]";
}

}  // namespace

bool post_reader::next(post& out) {
    using nlohmann::json;
    std::string line;
    while (src_->next_line(line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            ++stats_.malformed;
            if (stats_.malformed <= 5)
                std::fprintf(stderr, "corpus: %s: skipping malformed record (#%llu)\n",
                             path_.c_str(),
                             static_cast<unsigned long long>(stats_.malformed));
            continue;
        }
        const auto sub = j.find("subreddit");
        if (sub == j.end() || !sub->is_string() || sub->get_ref<const std::string&>().empty()) {
            ++stats_.malformed;
            continue;
        }

        std::string body;
        if (auto b = j.find("body"); b != j.end() && b->is_string()) {
            body = b->get<std::string>();
            if (is_tombstone(body)) {
                ++stats_.filtered;
                continue;
            }
        } else {
            // submission: title and selftext ingested as one body
            std::string title, selftext;
            if (auto t = j.find("title"); t != j.end() && t->is_string()) title = t->get<std::string>();
            if (auto s = j.find("selftext"); s != j.end() && s->is_string())
                selftext = s->get<std::string>();
            if (is_tombstone(selftext)) selftext.clear();
            body = title;
            if (!title.empty() && !selftext.empty()) body += "\n\n";
            body += selftext;
        }
        if (trim(body).empty()) {
            ++stats_.filtered;
            continue;
        }

        out.body = std::move(body);
        out.subreddit = sub->get<std::string>();
        out.id.clear();
        if (auto id = j.find("id"); id != j.end()) {
            if (id->is_string())
                out.id = id->get<std::string>();
            else if (id->is_number_integer())
                out.id = std::to_string(id->get<std::int64_t>());
        }
        out.created_utc = 0;
        if (auto ts = j.find("created_utc"); ts != j.end()) {
            if (ts->is_number()) {
                out.created_utc = static_cast<std::int64_t>(ts->get<double>());
            } else if (ts->is_string()) {
                try {
                    out.created_utc = std::stoll(ts->get<std::string>());
                } catch (const std::exception&) {
                }
            }
        }
        ++stats_.yielded;
        return true;
    }
    return false;
}

// -------- type counting --------

std::uint32_t type_counter::intern(std::string_view sub) {
    auto it = sub_ids_.find(sub);
    if (it != sub_ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(sub_names_.size());
    sub_names_.emplace_back(sub);
    sub_ids_.emplace(sub_names_.back(), id);
    return id;
}

void type_counter::add_tokens(const std::vector<std::string>& tokens, std::string_view subreddit) {
    if (tokens.empty()) return;
    const auto sid = intern(subreddit);
    for (const auto& t : tokens) {
        auto& a = map_[t];
        ++a.count;
        ++total_;
        auto it = std::lower_bound(a.subs.begin(), a.subs.end(), sid);
        if (it == a.subs.end() || *it != sid) a.subs.insert(it, sid);
    }
}

void type_counter::add(const post& p, const stopword_set& stopwords) {
    add_tokens(tokenize(preprocess(p.body), stopwords), p.subreddit);
}

void type_counter::merge(type_counter&& other) {
    // remap the other counter's subreddit ids into ours
    std::vector<std::uint32_t> remap(other.sub_names_.size());
    for (std::size_t i = 0; i < other.sub_names_.size(); ++i)
        remap[i] = intern(other.sub_names_[i]);
    for (auto& [surface, a] : other.map_) {
        auto& mine = map_[surface];
        mine.count += a.count;
        for (auto sid : a.subs) {
            const auto m = remap[sid];
            auto it = std::lower_bound(mine.subs.begin(), mine.subs.end(), m);
            if (it == mine.subs.end() || *it != m) mine.subs.insert(it, m);
        }
    }
    total_ += other.total_;
    other.map_.clear();
    other.sub_ids_.clear();
    other.sub_names_.clear();
    other.total_ = 0;
}

std::vector<token_type> type_counter::finish() {
    std::vector<token_type> out;
    out.reserve(map_.size());
    for (auto& [surface, a] : map_) {
        token_type t;
        t.surface = surface;
        t.count = a.count;
        t.subreddits.reserve(a.subs.size());
        for (auto sid : a.subs) t.subreddits.push_back(sub_names_[sid]);
        std::sort(t.subreddits.begin(), t.subreddits.end());
        t.n_subs = static_cast<std::uint32_t>(t.subreddits.size());
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end(),
              [](const token_type& a, const token_type& b) { return a.surface < b.surface; });
    map_.clear();
    sub_ids_.clear();
    sub_names_.clear();
    total_ = 0;
    return out;
}

// -------- context harvesting --------

namespace {

// ±window bytes around [tb,te), expanded cut points pulled in to whitespace
// boundaries so the snippet never starts or ends mid-word; inner whitespace
// collapsed (keeps prompts single-line).
std::string cut_window(std::string_view text, std::size_t tb, std::size_t te, int window) {
    std::size_t start = tb > static_cast<std::size_t>(window) ? tb - window : 0;
    std::size_t end = std::min(text.size(), te + static_cast<std::size_t>(window));
    while (start > 0 && start < tb &&
           !std::isspace(static_cast<unsigned char>(text[start - 1])))
        ++start;
    while (end > te && end < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[end])))
        --end;
    std::string out;
    out.reserve(end - start);
    bool in_space = true;  // also swallows leading whitespace
    for (std::size_t i = start; i < end; ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(c));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace

context_harvester::context_harvester(const std::vector<std::string>& candidates, int k, int window)
    : k_(k), window_(window) {
    if (k < 1) throw std::invalid_argument("context_harvester: k must be ≥ 1");
    for (const auto& c : candidates) state_.emplace(c, cand_state{});
    remaining_ = state_.size();
}

void context_harvester::feed(const post& p, const stopword_set& stopwords) {
    if (saturated()) return;
    const std::string text = preprocess(p.body);
    std::unordered_set<std::string, string_hash, std::equal_to<>> seen_here;
    for (const auto& sp : tokenize_spans(text, stopwords)) {
        auto it = state_.find(sp.surface);
        if (it == state_.end()) continue;
        if (!seen_here.emplace(sp.surface).second) continue;  // first occurrence per post
        auto& st = it->second;
        if (static_cast<int>(st.picked.size()) >= k_) continue;
        if (st.subs_used.contains(p.subreddit)) {
            if (static_cast<int>(st.backup.size()) < k_)
                st.backup.push_back({p.subreddit, cut_window(text, sp.begin, sp.end, window_)});
            continue;
        }
        st.picked.push_back({p.subreddit, cut_window(text, sp.begin, sp.end, window_)});
        st.subs_used.emplace(p.subreddit);
        if (static_cast<int>(st.picked.size()) == k_ && remaining_ > 0) --remaining_;
    }
}

std::unordered_map<std::string, std::vector<context>, string_hash, std::equal_to<>>
context_harvester::finish() {
    std::unordered_map<std::string, std::vector<context>, string_hash, std::equal_to<>> out;
    for (auto& [surface, st] : state_) {
        auto& lst = out[surface];
        lst = std::move(st.picked);
        for (auto& b : st.backup) {
            if (static_cast<int>(lst.size()) >= k_) break;
            lst.push_back(std::move(b));
        }
    }
    return out;
}

std::unordered_map<std::string, std::vector<context>, string_hash, std::equal_to<>>
harvest_contexts(const std::vector<post>& posts, const std::vector<std::string>& candidates, int k,
                 int window, const stopword_set& stopwords) {
    context_harvester h(candidates, k, window);
    for (const auto& p : posts) h.feed(p, stopwords);
    return h.finish();
}

}  // namespace neolog
