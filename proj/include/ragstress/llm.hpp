#pragma once

#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "ragstress/cf_store.hpp"
#include "ragstress/defects.hpp"
#include "ragstress/retrieval.hpp"

namespace ragstress {

struct ChatMessage {
    std::string role;  // "system", "user" or "assistant"
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 512;

    /// Known roles only, at least one user message, non-empty contents,
    /// temperature >= 0, max_tokens >= 1.
    void validate() const;

    /// Single user-message request.
    static ChatRequest user(std::string content, double temperature = 0.0, int max_tokens = 512);
};

struct EndpointConfig {
    std::string base_url;  // scheme://host[:port][/prefix]
    std::string model_name;
    std::string api_key;  // empty -> no Authorization header
    double timeout_sec = 60.0;
    int max_retries = 3;
    int concurrency_limit = 4;
    int backoff_ms = 500;  // doubled after every retry

    void validate() const;
};

/// Anything that can turn a chat request into assistant text: the HTTP
/// client below, or a deterministic stand-in for offline runs and tests.
class ChatEndpoint {
public:
    virtual ~ChatEndpoint() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// OpenAI-compatible chat-completions client. Retries transport failures
/// and 429/5xx responses with exponential backoff; other non-2xx statuses
/// raise EndpointError immediately with a body excerpt. Thread-safe, with
/// at most concurrency_limit requests in flight.
class HttpEndpoint : public ChatEndpoint {
public:
    explicit HttpEndpoint(EndpointConfig config);
    std::string complete(const ChatRequest& request) override;

    const EndpointConfig& config() const { return config_; }

private:
    std::string attempt(const ChatRequest& request);

    EndpointConfig config_;
    std::string scheme_host_;   // e.g. "http://localhost:8080"
    std::string path_prefix_;   // e.g. "/v1", possibly empty
    std::counting_semaphore<> in_flight_;
};

/// One-shot convenience over a transient HttpEndpoint.
std::string complete(const EndpointConfig& config, const ChatRequest& request);

/// Deterministic reading-comprehension stand-in used by closed-form tests:
/// returns the first gold answer when a Positive or Noisy slot's body
/// contains a normalized gold answer, else the query's stored wrong answer
/// when a Counterfactual slot is present, else "unknown".
class OracleGenerator {
public:
    explicit OracleGenerator(const CounterfactualStore* store = nullptr) : store_(store) {}

    std::string answer(const DefectiveContext& context, const QueryInstance& query) const;

private:
    const CounterfactualStore* store_;
};

/// Deterministic offline stand-in for the two counterfactual-generation
/// prompts. Wrong answers are derived by hashing the correct answer;
/// rewrites replace the correct answer in the passage (with a synthetic
/// fallback passage when plain replacement cannot scrub it). Any other
/// prompt raises EndpointError.
class OfflineStubEndpoint : public ChatEndpoint {
public:
    std::string complete(const ChatRequest& request) override;

    /// The wrong answer this stub generates for a given correct answer.
    static std::string wrong_answer_for(std::string_view correct_answer);
};

}  // namespace ragstress
