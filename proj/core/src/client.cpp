#include "neolog/client.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

namespace neolog {

namespace {

using nlohmann::json;

// splits "https://host:443" into (scheme://host[:port], "") or full URL
// into (origin, path-prefix)
std::pair<std::string, std::string> split_origin(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("endpoint base_url must include scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

std::string getenv_required(const std::string& var, const std::string& endpoint) {
    const char* v = std::getenv(var.c_str());
    if (!v || !*v)
        throw std::invalid_argument("endpoint " + endpoint + ": auth variable " + var +
                                    " is not set");
    return v;
}

chat_response from_httplib(const httplib::Result& res) {
    chat_response out;
    if (!res) {
        out.transport_error = true;
        out.error = httplib::to_string(res.error());
        return out;
    }
    out.http_status = res->status;
    if (res->status != 200) {
        out.error = res->body.substr(0, 512);
        return out;
    }
    out.text = res->body;  // caller maps provider JSON to text
    return out;
}

}  // namespace

// -------- token bucket --------

token_bucket::token_bucket(double capacity, double refill_per_sec)
    : capacity_(std::max(1.0, capacity)),
      tokens_(std::max(1.0, capacity)),
      refill_per_sec_(std::max(1e-6, refill_per_sec)),
      last_(std::chrono::steady_clock::now()) {}

void token_bucket::acquire() {
    while (true) {
        double wait_s = 0.0;
        {
            std::lock_guard lk(mu_);
            const auto now = std::chrono::steady_clock::now();
            tokens_ = std::min(capacity_,
                               tokens_ + std::chrono::duration<double>(now - last_).count() *
                                             refill_per_sec_);
            last_ = now;
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            wait_s = (1.0 - tokens_) / refill_per_sec_;
        }
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
    }
}

// -------- HTTP adapters --------

openai_chat_client::openai_chat_client(const endpoint_config& cfg)
    : cfg_(cfg), api_key_(getenv_required(cfg.auth_env, cfg.name)) {}

chat_response openai_chat_client::complete(const chat_request& req) {
    auto [origin, prefix] = split_origin(cfg_.base_url);
    httplib::Client cli(origin);
    cli.set_connection_timeout(30);
    cli.set_read_timeout(300);
    cli.set_bearer_token_auth(api_key_);

    json body = {
        {"model", req.model.empty() ? cfg_.model : req.model},
        {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
    };
    auto res = cli.Post(prefix + "/v1/chat/completions", body.dump(), "application/json");
    auto out = from_httplib(res);
    if (!out.ok()) return out;

    json j = json::parse(out.text, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
        out.http_status = 200;
        out.text.clear();
        out.error = "malformed chat-completions response";
        return out;
    }
    const auto& msg = j["choices"][0];
    out.text = msg.contains("message") && msg["message"].contains("content") &&
                       msg["message"]["content"].is_string()
                   ? msg["message"]["content"].get<std::string>()
                   : std::string();
    return out;
}

anthropic_client::anthropic_client(const endpoint_config& cfg)
    : cfg_(cfg), api_key_(getenv_required(cfg.auth_env, cfg.name)) {}

chat_response anthropic_client::complete(const chat_request& req) {
    auto [origin, prefix] = split_origin(cfg_.base_url);
    httplib::Client cli(origin);
    cli.set_connection_timeout(30);
    cli.set_read_timeout(300);
    httplib::Headers headers = {
        {"x-api-key", api_key_},
        {"anthropic-version", "2023-06-01"},
    };
    json body = {
        {"model", req.model.empty() ? cfg_.model : req.model},
        {"max_tokens", req.max_tokens},
        {"temperature", req.temperature},
        {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
    };
    auto res = cli.Post(prefix + "/v1/messages", headers, body.dump(), "application/json");
    auto out = from_httplib(res);
    if (!out.ok()) return out;

    json j = json::parse(out.text, nullptr, false);
    if (j.is_discarded() || !j.contains("content") || !j["content"].is_array()) {
        out.text.clear();
        out.error = "malformed messages response";
        return out;
    }
    std::string text;
    for (const auto& block : j["content"])
        if (block.contains("type") && block["type"] == "text" && block["text"].is_string())
            text += block["text"].get<std::string>();
    out.text = std::move(text);
    return out;
}

// -------- mock provider --------

mock_model_client::mock_model_client(const endpoint_config& cfg) {
    if (!cfg.mock_table.empty()) load_table(cfg.mock_table);
    if (!cfg.mock_script.empty()) load_script(cfg.mock_script);
}

void mock_model_client::set_label(std::string_view surface, std::string_view label) {
    labels_[std::string(surface)] = std::string(label);
}

void mock_model_client::load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("mock label table not readable: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto f = split(t, '\t');
        if (f.size() != 2) throw std::runtime_error(path + ": expected `surface<TAB>label`");
        set_label(f[0], f[1]);
    }
}

void mock_model_client::load_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("mock script not readable: " + path);
    std::string line;
    while (std::getline(in, line)) {
        const std::string t{trim(line)};
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ss(t);
        std::string op, arg;
        ss >> op >> arg;
        if (op == "garble")
            garble_left_[arg] += 1;
        else if (op == "omit")
            omit_left_[arg] += 1;
        else if (op == "down_after")
            down_after_ = std::stoll(arg);
        else
            throw std::runtime_error(path + ": unknown mock op `" + op + "`");
    }
}

chat_response mock_model_client::complete(const chat_request& req) {
    std::lock_guard lk(mu_);
    ++calls_;
    if (down_after_ >= 0 && calls_ > down_after_) {
        chat_response r;
        r.transport_error = true;
        r.error = "mock endpoint down";
        return r;
    }

    // pull the queried surfaces out of the prompt
    std::vector<std::string> tokens;
    std::istringstream ss(req.prompt);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.rfind("TOKEN: ", 0) == 0) {
            const auto t = trim(line.substr(7));
            if (!t.empty() && t[0] != '<') tokens.emplace_back(t);
        }
    }
    const bool single = req.prompt.find("Answer with ONLY the label:") != std::string::npos;

    chat_response r;
    r.http_status = 200;
    std::string out;
    for (const auto& t : tokens) {
        if (!single) {
            if (auto it = omit_left_.find(t); it != omit_left_.end() && it->second > 0) {
                --it->second;
                continue;
            }
            if (auto it = garble_left_.find(t); it != garble_left_.end() && it->second > 0) {
                --it->second;
                out += t + ": hmm, hard to say\n";
                continue;
            }
        }
        auto it = labels_.find(t);
        out += t + ":" + (it == labels_.end() ? std::string("NONE") : it->second) + "\n";
    }
    r.text = std::move(out);
    return r;
}

// -------- factory + retry --------

std::unique_ptr<model_client> make_client(const endpoint_config& cfg) {
    if (cfg.provider == "openai-chat") return std::make_unique<openai_chat_client>(cfg);
    if (cfg.provider == "anthropic") return std::make_unique<anthropic_client>(cfg);
    if (cfg.provider == "mock") return std::make_unique<mock_model_client>(cfg);
    throw std::invalid_argument("endpoint " + cfg.name + ": unknown provider `" + cfg.provider +
                                "`");
}

chat_response complete_with_retry(model_client& client, const endpoint_config& cfg,
                                  const chat_request& req, token_bucket& bucket) {
    chat_response last;
    for (int attempt = 0; attempt < std::max(1, cfg.max_attempts); ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<std::int64_t>(cfg.backoff_base_ms)
                                          << (attempt - 1)));
        bucket.acquire();
        last = client.complete(req);
        if (last.ok() || !last.transient()) return last;
    }
    return last;
}

}  // namespace neolog
