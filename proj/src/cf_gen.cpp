#include "ragstress/cf_gen.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "ragstress/errors.hpp"
#include "ragstress/evalkit.hpp"
#include "ragstress/prompts.hpp"
#include "ragstress/text.hpp"

namespace ragstress {

namespace {

/// Forwards to another endpoint while counting the calls that went out.
class CountingEndpoint : public ChatEndpoint {
public:
    explicit CountingEndpoint(ChatEndpoint& inner) : inner_(inner) {}

    std::string complete(const ChatRequest& request) override {
        count_.fetch_add(1, std::memory_order_relaxed);
        return inner_.complete(request);
    }

    std::size_t count() const { return count_.load(std::memory_order_relaxed); }

private:
    ChatEndpoint& inner_;
    std::atomic<std::size_t> count_{0};
};

double attempt_temperature(int attempt, const CfGenConfig& config) {
    return attempt == 0 ? 0.0 : config.retry_temperature;
}

/// Everything build_store produced for one query, committed later in run
/// order so worker scheduling never shows in the store file.
struct QueryOutcome {
    std::vector<CounterfactualStore::Entry> entries;
    std::vector<CfFailure> failures;
    std::size_t skipped = 0;
};

struct QueryJob {
    const QueryRecord* record = nullptr;
    std::vector<Document> clean_docs;    // full top-k, shown in the Step-1 prompt
    std::vector<Document> pending_docs;  // the subset without a stored rewrite
    std::size_t already_stored = 0;
    const std::string* resumed_wrong_answer = nullptr;  // from the store, if any
};

QueryOutcome process_query(const QueryJob& job, ChatEndpoint& llm, const CfGenConfig& config) {
    QueryOutcome outcome;
    outcome.skipped = job.already_stored;
    if (job.pending_docs.empty()) return outcome;

    const QueryInstance& query = job.record->query;
    std::string wrong;
    if (job.resumed_wrong_answer != nullptr) {
        wrong = *job.resumed_wrong_answer;
    } else {
        try {
            wrong = gen_wrong_answer(query, job.clean_docs, llm, config);
        } catch (const Error& e) {
            for (const Document& doc : job.pending_docs) {
                outcome.failures.push_back({query.query_id, doc.doc_id, e.what()});
            }
            return outcome;
        }
    }
    for (const Document& doc : job.pending_docs) {
        try {
            Document rewritten = rewrite_document(doc, query.gold_answers, wrong, llm, config);
            outcome.entries.push_back(
                {query.query_id, doc.doc_id, wrong, std::move(rewritten.body)});
        } catch (const Error& e) {
            outcome.failures.push_back({query.query_id, doc.doc_id, e.what()});
        }
    }
    return outcome;
}

}  // namespace

std::string gen_wrong_answer(const QueryInstance& query, const std::vector<Document>& clean_docs,
                             ChatEndpoint& llm, const CfGenConfig& config) {
    if (clean_docs.empty()) {
        throw InputError("gen_wrong_answer: no documents for query \"" + query.query_id + "\"");
    }
    const std::string prompt =
        render_wrong_answer_prompt(clean_docs, query.question, query.gold_answers.front());
    std::string last_problem;
    const int attempts = 1 + config.max_retries;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const std::string answer = strip(llm.complete(
            ChatRequest::user(prompt, attempt_temperature(attempt, config), config.max_tokens)));
        if (answer.empty()) {
            last_problem = "empty reply";
            continue;
        }
        const std::string normalized = normalize_answer(answer);
        bool matches_gold = false;
        for (const std::string& gold : query.gold_answers) {
            if (normalized == normalize_answer(gold)) {
                matches_gold = true;
                break;
            }
        }
        if (matches_gold) {
            last_problem = "reply \"" + answer + "\" matches a gold answer";
            continue;
        }
        return answer;
    }
    throw GenerationError("no usable wrong answer for query \"" + query.query_id + "\" after " +
                          std::to_string(attempts) + " attempts: " + last_problem);
}

Document rewrite_document(const Document& doc, const std::vector<std::string>& gold_answers,
                          std::string_view wrong_answer, ChatEndpoint& llm,
                          const CfGenConfig& config) {
    if (gold_answers.empty()) {
        throw InputError("rewrite_document: no gold answers for doc \"" + doc.doc_id + "\"");
    }
    const std::string wrong_normalized = normalize_answer(wrong_answer);
    for (const std::string& gold : gold_answers) {
        if (wrong_normalized == normalize_answer(gold)) {
            throw InputError("rewrite_document: wrong answer \"" + std::string(wrong_answer) +
                             "\" equals a gold answer under normalization");
        }
    }
    const std::string prompt =
        render_rewrite_prompt(doc, gold_answers.front(), wrong_answer);
    std::string last_problem;
    const int attempts = 1 + config.max_retries;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const std::string body = strip(llm.complete(
            ChatRequest::user(prompt, attempt_temperature(attempt, config), config.max_tokens)));
        if (body.empty()) {
            last_problem = "empty reply";
            continue;
        }
        bool leaks_gold = false;
        for (const std::string& gold : gold_answers) {
            if (contains_normalized(body, gold)) {
                leaks_gold = true;
                break;
            }
        }
        if (leaks_gold) {
            last_problem = "rewritten passage still contains a gold answer";
            continue;
        }
        Document rewritten = doc;
        rewritten.body = body;
        return rewritten;
    }
    throw GenerationError("no usable rewrite of doc \"" + doc.doc_id + "\" after " +
                          std::to_string(attempts) + " attempts: " + last_problem);
}

BuildReport build_store(const Run& run, const Corpus& corpus, ChatEndpoint& llm,
                        CounterfactualStore& store, const CfGenConfig& config) {
    BuildReport report;
    CountingEndpoint counted(llm);

    // Snapshot the per-query work up front: workers must not read the store
    // while the commit loop writes it.
    std::vector<QueryJob> jobs;
    std::vector<QueryOutcome> outcomes(run.records().size());
    jobs.reserve(run.records().size());
    for (const QueryRecord& record : run.records()) {
        QueryJob job;
        job.record = &record;
        job.resumed_wrong_answer = store.find_wrong_answer(record.query.query_id);
        try {
            job.clean_docs = top_k_documents(record, corpus, config.k);
            for (const Document& doc : job.clean_docs) {
                if (store.has_rewrite(record.query.query_id, doc.doc_id)) {
                    ++job.already_stored;
                } else {
                    job.pending_docs.push_back(doc);
                }
            }
        } catch (const Error& e) {
            job.clean_docs.clear();
            job.pending_docs.clear();
            outcomes[jobs.size()].failures.push_back({record.query.query_id, "", e.what()});
        }
        jobs.push_back(std::move(job));
    }

    const int workers =
        std::max(1, std::min(config.jobs, static_cast<int>(jobs.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            QueryOutcome produced = process_query(jobs[i], counted, config);
            outcomes[i].entries = std::move(produced.entries);
            outcomes[i].skipped = produced.skipped;
            for (CfFailure& f : produced.failures) outcomes[i].failures.push_back(std::move(f));
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) return;
                    try {
                        QueryOutcome produced = process_query(jobs[i], counted, config);
                        outcomes[i].entries = std::move(produced.entries);
                        outcomes[i].skipped = produced.skipped;
                        for (CfFailure& f : produced.failures) {
                            outcomes[i].failures.push_back(std::move(f));
                        }
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    for (QueryOutcome& outcome : outcomes) {
        for (CounterfactualStore::Entry& entry : outcome.entries) {
            store.put(std::move(entry));
            ++report.pairs_completed;
        }
        report.pairs_skipped += outcome.skipped;
        for (CfFailure& failure : outcome.failures) {
            report.failures.push_back(std::move(failure));
        }
    }
    report.calls_issued = counted.count();
    return report;
}

}  // namespace ragstress
