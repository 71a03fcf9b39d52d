#include "ragstress/llm.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#ifdef RAGSTRESS_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "ragstress/errors.hpp"
#include "ragstress/evalkit.hpp"
#include "ragstress/io.hpp"
#include "ragstress/rng.hpp"
#include "ragstress/text.hpp"

namespace ragstress {

namespace {

std::string excerpt(std::string_view body) {
    constexpr std::size_t kLimit = 200;
    if (body.size() <= kLimit) return std::string(body);
    return std::string(body.substr(0, kLimit)) + "...";
}

std::string request_body(const EndpointConfig& config, const ChatRequest& request) {
    Json body;
    body["model"] = config.model_name;
    Json messages = Json::array();
    for (const ChatMessage& m : request.messages) {
        messages.push_back(Json{{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    return body.dump();
}

std::string extract_content(std::string_view body) {
    const Json parsed = Json::parse(body, nullptr, false);
    if (parsed.is_discarded()) {
        throw EndpointError("endpoint returned malformed JSON: " + excerpt(body));
    }
    if (!parsed.is_object() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty()) {
        throw EndpointError("endpoint response has no choices: " + excerpt(body));
    }
    const Json& first = parsed["choices"][0];
    if (!first.is_object() || !first.contains("message") || !first["message"].is_object() ||
        !first["message"].contains("content") || !first["message"]["content"].is_string()) {
        throw EndpointError("endpoint response missing choices[0].message.content: " +
                            excerpt(body));
    }
    return first["message"]["content"].get<std::string>();
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status <= 599);
}

bool ascii_iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (ascii_lower(static_cast<unsigned char>(a[i])) !=
            ascii_lower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

std::string replace_all_ci(std::string_view text, std::string_view target,
                           std::string_view replacement) {
    if (target.empty()) return std::string(text);
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (i + target.size() <= text.size() &&
            ascii_iequals(text.substr(i, target.size()), target)) {
            out.append(replacement);
            i += target.size();
        } else {
            out.push_back(text[i]);
            ++i;
        }
    }
    return out;
}

const std::string kWrongAnswerLead =
    "Based on a given question and its correct answer, generate a misleading wrong answer.";
const std::string kCorrectAnswerMarker = "\nCorrect Answer: ";
const std::string kRewriteLead =
    "You are a writing AI. Rewrite the passage by replacing all content and information "
    "related to ";
const std::string kEnsureMarker = ". Ensure that the rewritten passage is fluent and concise";
const std::string kWithSeparator = " with ";
const std::string kDocumentMarker = "\nOriginal Document: ";

}  // namespace

void ChatRequest::validate() const {
    if (messages.empty()) {
        throw InputError("chat request has no messages");
    }
    bool has_user = false;
    for (const ChatMessage& m : messages) {
        if (m.role != "system" && m.role != "user" && m.role != "assistant") {
            throw InputError("chat message has unknown role \"" + m.role + "\"");
        }
        if (m.content.empty()) {
            throw InputError("chat message with role \"" + m.role + "\" has empty content");
        }
        if (m.role == "user") has_user = true;
    }
    if (!has_user) {
        throw InputError("chat request has no user message");
    }
    if (!(temperature >= 0.0)) {
        throw InputError("chat temperature must be >= 0");
    }
    if (max_tokens < 1) {
        throw InputError("chat max_tokens must be >= 1");
    }
}

ChatRequest ChatRequest::user(std::string content, double temperature, int max_tokens) {
    ChatRequest request;
    request.messages.push_back({"user", std::move(content)});
    request.temperature = temperature;
    request.max_tokens = max_tokens;
    return request;
}

void EndpointConfig::validate() const {
    if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
        throw InputError("endpoint base_url must start with http:// or https://, got \"" +
                         base_url + "\"");
    }
    if (!(timeout_sec > 0.0)) {
        throw InputError("endpoint timeout must be positive");
    }
    if (max_retries < 0) {
        throw InputError("endpoint max_retries must be >= 0");
    }
    if (concurrency_limit < 1) {
        throw InputError("endpoint concurrency_limit must be >= 1");
    }
    if (backoff_ms < 0) {
        throw InputError("endpoint backoff_ms must be >= 0");
    }
}

HttpEndpoint::HttpEndpoint(EndpointConfig config)
    : config_(std::move(config)), in_flight_(1) {
    config_.validate();
    // Re-seed the semaphore to the configured limit (constructed at 1 above
    // because the count is not assignable).
    for (int i = 1; i < config_.concurrency_limit; ++i) in_flight_.release();

    const std::size_t scheme_end = config_.base_url.find("://") + 3;
    const std::size_t path_start = config_.base_url.find('/', scheme_end);
    if (path_start == std::string::npos) {
        scheme_host_ = config_.base_url;
    } else {
        scheme_host_ = config_.base_url.substr(0, path_start);
        path_prefix_ = config_.base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

std::string HttpEndpoint::attempt(const ChatRequest& request) {
    httplib::Client client(scheme_host_);
    const auto whole = std::chrono::duration<double>(config_.timeout_sec);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(whole);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(whole - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    const auto result = client.Post(path_prefix_ + "/chat/completions", headers,
                                    request_body(config_, request), "application/json");
    if (!result) {
        throw TransportError("request to " + scheme_host_ + " failed: " +
                             httplib::to_string(result.error()));
    }
    const int status = result->status;
    if (status >= 200 && status < 300) {
        return extract_content(result->body);
    }
    if (retryable_status(status)) {
        throw TransportError("endpoint returned status " + std::to_string(status) + ": " +
                             excerpt(result->body));
    }
    throw EndpointError("endpoint returned status " + std::to_string(status) + ": " +
                        excerpt(result->body));
}

std::string HttpEndpoint::complete(const ChatRequest& request) {
    request.validate();
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<>* s;
        ~Release() { s->release(); }
    } release{&in_flight_};

    int delay_ms = config_.backoff_ms;
    for (int tries_left = config_.max_retries;; --tries_left) {
        try {
            return attempt(request);
        } catch (const TransportError&) {
            if (tries_left <= 0) throw;
        }
        if (delay_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        }
        delay_ms *= 2;
    }
}

std::string complete(const EndpointConfig& config, const ChatRequest& request) {
    HttpEndpoint endpoint(config);
    return endpoint.complete(request);
}

std::string OracleGenerator::answer(const DefectiveContext& context,
                                    const QueryInstance& query) const {
    for (const ContextSlot& slot : context.slots) {
        if (slot.label != DefectType::kPositive && slot.label != DefectType::kNoisy) continue;
        for (const std::string& gold : query.gold_answers) {
            if (contains_normalized(slot.document.body, gold)) {
                return query.gold_answers.front();
            }
        }
    }
    for (const ContextSlot& slot : context.slots) {
        if (slot.label != DefectType::kCounterfactual) continue;
        if (store_ != nullptr) {
            if (const std::string* wrong = store_->find_wrong_answer(context.query_id)) {
                return *wrong;
            }
        }
        throw DependencyError("oracle generator: no stored wrong answer for query \"" +
                              context.query_id + "\"");
    }
    return "unknown";
}

std::string OfflineStubEndpoint::wrong_answer_for(std::string_view correct_answer) {
    const std::uint64_t h = fnv1a64(normalize_answer(correct_answer));
    char hex[16];
    std::snprintf(hex, sizeof(hex), "%08llx",
                  static_cast<unsigned long long>(h & 0xffffffffull));
    return std::string("entity ") + hex;
}

std::string OfflineStubEndpoint::complete(const ChatRequest& request) {
    request.validate();
    const std::string* prompt = nullptr;
    for (const ChatMessage& m : request.messages) {
        if (m.role == "user") prompt = &m.content;
    }
    // validate() guarantees a user message.

    if (prompt->rfind(kWrongAnswerLead, 0) == 0) {
        const std::size_t marker = prompt->rfind(kCorrectAnswerMarker);
        if (marker == std::string::npos) {
            throw EndpointError("offline stub: wrong-answer prompt has no correct answer");
        }
        return wrong_answer_for(prompt->substr(marker + kCorrectAnswerMarker.size()));
    }

    if (prompt->rfind(kRewriteLead, 0) == 0) {
        const std::size_t pair_begin = kRewriteLead.size();
        const std::size_t ensure = prompt->find(kEnsureMarker, pair_begin);
        if (ensure == std::string::npos) {
            throw EndpointError("offline stub: rewrite prompt is missing its framing");
        }
        const std::string_view pair =
            std::string_view(*prompt).substr(pair_begin, ensure - pair_begin);
        const std::size_t sep = pair.rfind(kWithSeparator);
        if (sep == std::string_view::npos) {
            throw EndpointError("offline stub: rewrite prompt has no answer pair");
        }
        const std::string_view correct = pair.substr(0, sep);
        const std::string_view wrong = pair.substr(sep + kWithSeparator.size());
        const std::size_t doc = prompt->find(kDocumentMarker, ensure);
        if (doc == std::string::npos) {
            throw EndpointError("offline stub: rewrite prompt has no document");
        }
        const std::string_view passage =
            std::string_view(*prompt).substr(doc + kDocumentMarker.size());
        std::string rewritten = replace_all_ci(passage, correct, wrong);
        if (contains_normalized(rewritten, correct)) {
            // Replacement could not scrub the answer (casing/punctuation
            // variants); fall back to a fresh passage.
            rewritten =
                "According to the revised record, the answer is " + std::string(wrong) + ".";
        }
        return rewritten;
    }

    throw EndpointError("offline stub cannot answer this prompt: " + excerpt(*prompt));
}

}  // namespace ragstress
