#include "neolog/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

extern char** environ;

namespace neolog {

std::vector<std::string> default_lang_inventory() {
    return {"en", "es", "fr", "de", "pt", "it", "nl", "pl", "tr", "sv", "fi", "da",
            "no", "ro", "ca", "cs", "sk", "sl", "hr", "sr", "bs", "bg", "ru", "uk",
            "el", "hu", "et", "lv", "lt", "ga", "cy", "eu", "gl", "is", "sq", "mk",
            "az", "id", "ms", "tl", "vi", "sw", "af", "eo", "la", "mt", "lb"};
}

pipeline_config::pipeline_config() : lang_inventory(default_lang_inventory()) {}

namespace {

endpoint_config& voter_slot(pipeline_config& cfg, std::size_t n) {
    while (cfg.voters.size() < n) {
        endpoint_config ep;
        ep.name = "voter" + std::to_string(cfg.voters.size() + 1);
        ep.role = endpoint_role::voter;
        cfg.voters.push_back(ep);
    }
    return cfg.voters[n - 1];
}

bool set_endpoint_field(endpoint_config& ep, const std::string& field, const std::string& value) {
    if (field == "name") ep.name = value;
    else if (field == "provider") ep.provider = value;
    else if (field == "base_url") ep.base_url = value;
    else if (field == "model") ep.model = value;
    else if (field == "auth_env") ep.auth_env = value;
    else if (field == "rpm") ep.requests_per_minute = std::stod(value);
    else if (field == "max_attempts") ep.max_attempts = std::stoi(value);
    else if (field == "backoff_base_ms") ep.backoff_base_ms = std::stoi(value);
    else if (field == "mock_table") ep.mock_table = value;
    else if (field == "mock_script") ep.mock_script = value;
    else return false;
    return true;
}

std::vector<std::string> parse_codes(const std::string& value) {
    std::vector<std::string> out;
    for (auto& c : split(value, ',')) {
        auto t = trim(c);
        if (!t.empty()) out.push_back(to_lower_ascii(t));
    }
    return out;
}

}  // namespace

void pipeline_config::set(const std::string& key, const std::string& value) {
    try {
        if (key == "corpus") corpus = value;
        else if (key == "workdir") workdir = value;
        else if (key == "stopwords") stopwords = value;
        else if (key == "rulepack") rulepack = value;
        else if (key == "vocab_manifest") vocab_manifest = value;
        else if (key == "freq_dict") freq_dict = value;
        else if (key == "lang_profiles") lang_profiles = value;
        else if (key == "cutoff_date") cutoff_date = value;
        else if (key == "min_len") min_len = std::stoi(value);
        else if (key == "max_len") max_len = std::stoi(value);
        else if (key == "spam_len") spam_len = std::stoi(value);
        else if (key == "spam_unique_max") spam_unique_max = std::stoi(value);
        else if (key == "entropy_min") entropy_min = std::stod(value);
        else if (key == "entropy_min_len") entropy_min_len = std::stoi(value);
        else if (key == "max_edit") max_edit = std::stoi(value);
        else if (key == "typo_min_len") typo_min_len = std::stoi(value);
        else if (key == "typo_freq_floor") typo_freq_floor = std::stoull(value);
        else if (key == "concat_min_len") concat_min_len = std::stoi(value);
        else if (key == "concat_min_part") concat_min_part = std::stoi(value);
        else if (key == "freq_threshold") freq_threshold = std::stoull(value);
        else if (key == "min_subreddits") min_subreddits = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "lang_target") lang_target = to_lower_ascii(value);
        else if (key == "lang_confidence") lang_confidence = std::stod(value);
        else if (key == "lang_inventory") lang_inventory = parse_codes(value);
        else if (key == "batch_size") batch_size = std::stoi(value);
        else if (key == "contexts_per_candidate") contexts_per_candidate = std::stoi(value);
        else if (key == "context_window") context_window = std::stoi(value);
        else if (key.rfind("voter.", 0) == 0) {
            const auto rest = key.substr(6);
            const auto dot = rest.find('.');
            if (dot == std::string::npos) throw std::invalid_argument("bad voter key");
            const auto n = std::stoul(rest.substr(0, dot));
            if (n == 0 || n > 16) throw std::invalid_argument("voter index out of range");
            if (!set_endpoint_field(voter_slot(*this, n), rest.substr(dot + 1), value))
                throw std::invalid_argument("unknown endpoint field");
        } else if (key.rfind("verifier.", 0) == 0) {
            if (!has_verifier) {
                verifier.name = "verifier";
                verifier.role = endpoint_role::verifier;
                has_verifier = true;
            }
            if (!set_endpoint_field(verifier, key.substr(9), value))
                throw std::invalid_argument("unknown endpoint field");
        } else {
            throw std::invalid_argument("unknown config key");
        }
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config key `" + key + "`: " + e.what());
    } catch (const std::exception& e) {
        throw std::invalid_argument("config key `" + key + "`: bad value `" + value + "`");
    }
}

pipeline_config pipeline_config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config not readable: " + path);
    pipeline_config cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        // `key = value`, `key=value`, or `key value`
        auto sep = t.find('=');
        if (sep == std::string_view::npos) sep = t.find_first_of(" \t");
        if (sep == std::string_view::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected `key value` or `key=value`");
        const std::string key{trim(t.substr(0, sep))};
        const std::string value{trim(t.substr(sep + 1))};
        try {
            cfg.set(key, value);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

void pipeline_config::apply_env() {
    constexpr std::string_view prefix = "NEOLOG_";
    for (char** e = environ; *e; ++e) {
        std::string_view entry(*e);
        if (entry.substr(0, prefix.size()) != prefix) continue;
        const auto eq = entry.find('=');
        if (eq == std::string_view::npos) continue;
        std::string key = to_lower_ascii(entry.substr(prefix.size(), eq - prefix.size()));
        std::replace(key.begin(), key.end(), '_', '.');
        // config keys use '_' inside words and '.' only for endpoint paths;
        // try the dotted form first, then collapse back
        const std::string value(entry.substr(eq + 1));
        for (std::string candidate : {key, [&] {
                 std::string s = key;
                 std::replace(s.begin(), s.end(), '.', '_');
                 return s;
             }()}) {
            try {
                set(candidate, value);
                break;
            } catch (const std::invalid_argument&) {
                continue;
            }
        }
    }
}

void pipeline_config::validate() const {
    const auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (min_len <= 0 || min_len > max_len) fail("need 0 < min_len ≤ max_len");
    if (spam_unique_max < 1) fail("spam_unique_max must be ≥ 1");
    if (entropy_min < 0) fail("entropy_min must be ≥ 0");
    if (entropy_min_len < 1) fail("entropy_min_len must be ≥ 1");
    if (max_edit < 1 || max_edit > 2) fail("max_edit must be 1 or 2");
    if (typo_min_len < 1) fail("typo_min_len must be ≥ 1");
    if (concat_min_part < 1 || concat_min_len < 2 * concat_min_part)
        fail("need concat_min_len ≥ 2·concat_min_part");
    if (lang_confidence < 0.0 || lang_confidence > 1.0) fail("lang_confidence must be in [0,1]");
    if (lang_inventory.empty()) fail("lang_inventory must not be empty");
    if (std::find(lang_inventory.begin(), lang_inventory.end(), lang_target) ==
        lang_inventory.end())
        fail("lang_target must be in lang_inventory");
    if (batch_size < 1) fail("batch_size must be ≥ 1");
    if (contexts_per_candidate < 1) fail("contexts_per_candidate must be ≥ 1");
    if (context_window < 1) fail("context_window must be ≥ 1");
    int voters_active = 0;
    for (const auto& v : voters)
        if (!v.provider.empty()) ++voters_active;
    if (voters_active != static_cast<int>(voters.size()))
        fail("every declared voter needs a provider");
    if (!voters.empty() && voters.size() % 2 == 0)
        fail("voter count must be odd for majority voting");
    for (const auto& v : voters)
        if (v.role != endpoint_role::voter) fail("voter endpoints must have role voter");
    if (has_verifier && verifier.provider.empty()) fail("verifier needs a provider");
}

namespace {

std::uint64_t fold(std::uint64_t h, std::string_view s) {
    h = fnv1a64_mix(h, s.size());
    return fnv1a64(s, h);
}

std::uint64_t fold_endpoint(std::uint64_t h, const endpoint_config& ep) {
    h = fold(h, ep.name);
    h = fold(h, ep.provider);
    h = fold(h, ep.base_url);
    h = fold(h, ep.model);
    h = fold(h, ep.mock_table);
    h = fold(h, ep.mock_script);
    return h;
}

}  // namespace

std::uint64_t pipeline_config::stage_hash(stage s) const {
    std::uint64_t h = fnv1a64("neolog-stage-chain-1");
    h = fold(h, corpus);
    h = fold(h, stopwords);
    h = fold(h, cutoff_date);
    if (s == stage::tokenize) return h;

    h = fold(h, vocab_manifest);
    if (s == stage::vocab) return h;

    h = fold(h, rulepack);
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(min_len));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(max_len));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(spam_len));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(spam_unique_max));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(entropy_min * 1e6));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(entropy_min_len));
    if (s == stage::pattern) return h;

    h = fold(h, freq_dict);
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(concat_min_len));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(concat_min_part));
    if (s == stage::concat) return h;

    h = fnv1a64_mix(h, static_cast<std::uint64_t>(max_edit));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(typo_min_len));
    h = fnv1a64_mix(h, typo_freq_floor);
    if (s == stage::typo) return h;

    h = fnv1a64_mix(h, freq_threshold);
    h = fnv1a64_mix(h, min_subreddits);
    if (s == stage::freq) return h;

    h = fold(h, lang_profiles);
    h = fold(h, lang_target);
    for (const auto& code : lang_inventory) h = fold(h, code);
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(lang_confidence * 1e6));
    if (s == stage::lang) return h;

    h = fnv1a64_mix(h, static_cast<std::uint64_t>(batch_size));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(contexts_per_candidate));
    h = fnv1a64_mix(h, static_cast<std::uint64_t>(context_window));
    for (const auto& v : voters) h = fold_endpoint(h, v);
    if (s == stage::vote) return h;

    if (has_verifier) h = fold_endpoint(h, verifier);
    return h;
}

}  // namespace neolog
