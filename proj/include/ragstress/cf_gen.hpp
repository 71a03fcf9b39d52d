#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ragstress/cf_store.hpp"
#include "ragstress/corpus.hpp"
#include "ragstress/llm.hpp"
#include "ragstress/retrieval.hpp"

namespace ragstress {

struct CfGenConfig {
    int k = 5;                      // documents rewritten per query
    int max_retries = 3;            // extra attempts after the first
    double retry_temperature = 0.7; // first attempt always samples at 0
    int max_tokens = 512;
    int jobs = 1;                   // concurrent queries in build_store
};

/// Ask the endpoint for a misleading wrong answer. Accepts the first reply
/// that is non-empty and differs from every gold answer under
/// normalization; GenerationError once attempts are exhausted.
std::string gen_wrong_answer(const QueryInstance& query, const std::vector<Document>& clean_docs,
                             ChatEndpoint& llm, const CfGenConfig& config = {});

/// Ask the endpoint to rewrite one document so it supports the wrong
/// answer. The result keeps the document's id and title; its body must not
/// contain any gold answer under normalization, else GenerationError after
/// the retry budget.
Document rewrite_document(const Document& doc, const std::vector<std::string>& gold_answers,
                          std::string_view wrong_answer, ChatEndpoint& llm,
                          const CfGenConfig& config = {});

struct CfFailure {
    std::string query_id;
    std::string doc_id;  // empty when the whole query failed before any pair
    std::string reason;
};

struct BuildReport {
    std::size_t calls_issued = 0;     // chat completions actually sent
    std::size_t pairs_completed = 0;  // rewrites stored by this run
    std::size_t pairs_skipped = 0;    // already present (resume)
    std::vector<CfFailure> failures;
};

/// Generate wrong answers and rewrites for every (query, top-k doc) pair in
/// the run that the store does not already cover. Failures go into the
/// report instead of aborting the batch. Queries may be processed
/// concurrently (config.jobs); the store is only written after all workers
/// finish, in run order, so the result is independent of scheduling.
BuildReport build_store(const Run& run, const Corpus& corpus, ChatEndpoint& llm,
                        CounterfactualStore& store, const CfGenConfig& config = {});

}  // namespace ragstress
