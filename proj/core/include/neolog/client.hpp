#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "neolog/util.hpp"

namespace neolog {

struct chat_request {
    std::string prompt;
    std::string model;
    double temperature = 0.0;  // deterministic decoding where supported
    int max_tokens = 1024;
};

struct chat_response {
    std::string text;
    int http_status = 0;
    bool transport_error = false;  // connect/timeout level failure
    std::string error;

    bool ok() const { return !transport_error && http_status == 200; }
    // worth retrying with backoff
    bool transient() const {
        return transport_error || http_status == 429 || http_status >= 500;
    }
};

class model_client {
  public:
    virtual ~model_client() = default;
    virtual chat_response complete(const chat_request& req) = 0;
};

enum class endpoint_role : std::uint8_t { voter, verifier };

struct endpoint_config {
    std::string name;
    std::string provider;    // "openai-chat" | "anthropic" | "mock"
    std::string base_url;    // e.g. https://api.example.com
    std::string model;
    std::string auth_env;    // environment variable holding the key
    endpoint_role role = endpoint_role::voter;
    double requests_per_minute = 60.0;
    int max_attempts = 5;        // transient-error retries before hard-down
    int backoff_base_ms = 500;   // doubles per attempt, no jitter (reproducible)
    std::string mock_table;      // mock provider: label-table file
    std::string mock_script;     // mock provider: failure-injection file
};

// Classic token bucket; acquire() sleeps until a token is available.
class token_bucket {
  public:
    token_bucket(double capacity, double refill_per_sec);
    void acquire();

  private:
    std::mutex mu_;
    double capacity_;
    double tokens_;
    double refill_per_sec_;
    std::chrono::steady_clock::time_point last_;
};

// Chat-completions shape: POST {base}/v1/chat/completions with bearer auth.
class openai_chat_client : public model_client {
  public:
    explicit openai_chat_client(const endpoint_config& cfg);
    chat_response complete(const chat_request& req) override;

  private:
    endpoint_config cfg_;
    std::string api_key_;
};

// Messages shape: POST {base}/v1/messages with x-api-key header.
class anthropic_client : public model_client {
  public:
    explicit anthropic_client(const endpoint_config& cfg);
    chat_response complete(const chat_request& req) override;

  private:
    endpoint_config cfg_;
    std::string api_key_;
};

// Deterministic stand-in for tests and offline runs. Reads the TOKEN:
// lines out of the incoming prompt and answers `surface:LABEL` per its
// label table (default NONE). A script can inject failures:
//   garble <surface>   → first MULTI answer for surface is unparseable
//   omit <surface>     → first MULTI answer omits surface entirely
//   down_after <n>     → transport error on every call after the nth
class mock_model_client : public model_client {
  public:
    explicit mock_model_client(const endpoint_config& cfg);
    mock_model_client() = default;

    void set_label(std::string_view surface, std::string_view label);
    void load_table(const std::string& path);   // TSV: surface, label
    void load_script(const std::string& path);

    chat_response complete(const chat_request& req) override;

  private:
    std::unordered_map<std::string, std::string, string_hash, std::equal_to<>> labels_;
    std::unordered_map<std::string, int, string_hash, std::equal_to<>> garble_left_;
    std::unordered_map<std::string, int, string_hash, std::equal_to<>> omit_left_;
    std::int64_t down_after_ = -1;  // -1: never
    std::int64_t calls_ = 0;
    std::mutex mu_;
};

// Factory keyed on cfg.provider; throws std::invalid_argument on an
// unknown provider or a missing auth variable for HTTP providers.
std::unique_ptr<model_client> make_client(const endpoint_config& cfg);

// complete() with exponential backoff on transient errors; returns the
// last response (caller checks ok()). Sleeps cfg.backoff_base_ms·2^i.
chat_response complete_with_retry(model_client& client, const endpoint_config& cfg,
                                  const chat_request& req, token_bucket& bucket);

}  // namespace neolog
