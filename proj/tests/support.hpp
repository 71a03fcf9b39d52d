#pragma once

// Shared fixtures for the test suites: a synthetic corpus/run builder with
// exactly one gold-bearing document per query, scriptable chat endpoints,
// and a self-cleaning temporary directory.

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ragstress/corpus.hpp"
#include "ragstress/io.hpp"
#include "ragstress/llm.hpp"
#include "ragstress/retrieval.hpp"

namespace ts {

inline std::string pad5(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", i);
    return buf;
}

inline std::string query_id(int i) { return "q" + pad5(i); }

/// Query i's single gold answer: a token no other query's documents carry.
/// Fixed-width padding keeps one query's token from being a substring of
/// another's, so normalized containment checks cannot cross queries.
inline std::string gold_answer(int i) { return "alpha" + pad5(i); }

struct SyntheticSpec {
    int n_queries = 10;
    int depth = 10;  // ranked entries per query
    int k = 5;       // the gold document sits at rank (i % k) + 1
};

struct SyntheticData {
    ragstress::Corpus corpus;
    ragstress::Run run;
};

/// Every document is private to its query, so corpus draws and tail draws
/// can never leak a usable answer into another query's context; exactly one
/// top-k document per query contains its gold token.
inline SyntheticData make_synthetic(const SyntheticSpec& spec) {
    SyntheticData data;
    for (int i = 0; i < spec.n_queries; ++i) {
        const int gold_rank = (i % spec.k) + 1;
        ragstress::QueryRecord record;
        record.query.query_id = query_id(i);
        record.query.question = "which token labels topic " + pad5(i) + "?";
        record.query.gold_answers = {gold_answer(i)};
        record.list.query_id = record.query.query_id;
        for (int r = 1; r <= spec.depth; ++r) {
            ragstress::Document doc;
            doc.doc_id = query_id(i) + "-d" + std::to_string(r);
            doc.title = "topic " + pad5(i);
            if (r == gold_rank) {
                doc.body = "the answer is " + gold_answer(i) + " according to this record";
            } else if (r <= spec.k) {
                doc.body = "plain passage " + pad5(i) + " slot " + std::to_string(r) +
                           " with no useful content";
            } else {
                doc.body = "tail passage " + pad5(i) + " rank " + std::to_string(r) +
                           " background material";
            }
            record.list.entries.push_back({doc.doc_id, r, 100.0 - static_cast<double>(r)});
            data.corpus.add(std::move(doc));
        }
        data.run.add(std::move(record));
    }
    return data;
}

/// The queries of a run in the JSON Lines form the ingest command reads.
inline void save_queries_jsonl(const ragstress::Run& run, const std::filesystem::path& path) {
    ragstress::JsonlWriter writer(path);
    for (const ragstress::QueryRecord& record : run.records()) {
        writer.write(ragstress::Json{{"query_id", record.query.query_id},
                                     {"question", record.query.question},
                                     {"answers", record.query.gold_answers}});
    }
    writer.close();
}

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ragstress_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Endpoint that delegates every completion to a callable.
class FnEndpoint : public ragstress::ChatEndpoint {
public:
    using Fn = std::function<std::string(const ragstress::ChatRequest&)>;
    explicit FnEndpoint(Fn fn) : fn_(std::move(fn)) {}
    std::string complete(const ragstress::ChatRequest& request) override {
        request.validate();
        return fn_(request);
    }

private:
    Fn fn_;
};

/// Counts completions while forwarding them to another endpoint.
class CountingEndpoint : public ragstress::ChatEndpoint {
public:
    explicit CountingEndpoint(ragstress::ChatEndpoint& inner) : inner_(&inner) {}
    std::string complete(const ragstress::ChatRequest& request) override {
        calls.fetch_add(1);
        return inner_->complete(request);
    }

    std::atomic<int> calls{0};

private:
    ragstress::ChatEndpoint* inner_;
};

inline const std::string& last_user_content(const ragstress::ChatRequest& request) {
    const std::string* content = nullptr;
    for (const ragstress::ChatMessage& m : request.messages) {
        if (m.role == "user") content = &m.content;
    }
    return *content;  // callers only pass requests with a user message
}

inline bool is_wrong_answer_prompt(const ragstress::ChatRequest& request) {
    return last_user_content(request).rfind("Based on a given question", 0) == 0;
}

inline bool is_rewrite_prompt(const ragstress::ChatRequest& request) {
    return last_user_content(request).rfind("You are a writing AI.", 0) == 0;
}

/// The passage a rewrite prompt asks to rework (everything after the
/// document marker).
inline std::string rewrite_prompt_document(const ragstress::ChatRequest& request) {
    static const std::string kMarker = "\nOriginal Document: ";
    const std::string& content = last_user_content(request);
    const std::size_t at = content.find(kMarker);
    return at == std::string::npos ? std::string() : content.substr(at + kMarker.size());
}

/// Adversary for the rewrite loop: answers the wrong-answer prompt
/// cooperatively but echoes the original passage back for every rewrite, so
/// gold-bearing documents can never pass validation.
class EchoRewriter : public ragstress::ChatEndpoint {
public:
    std::string complete(const ragstress::ChatRequest& request) override {
        request.validate();
        if (is_wrong_answer_prompt(request)) return "omega decoy";
        if (is_rewrite_prompt(request)) return rewrite_prompt_document(request);
        return "unexpected prompt";
    }
};

}  // namespace ts
