#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ragstress/corpus.hpp"
#include "ragstress/rng.hpp"

namespace ragstress {

struct QueryInstance {
    std::string query_id;
    std::string question;
    std::vector<std::string> gold_answers;  // non-empty, entries non-empty after trim
};

struct RankedEntry {
    std::string doc_id;
    int rank = 0;  // 1-based, contiguous
    double score = 0.0;
};

/// Ranked retrieval result for one query; ranks run 1..n with no gaps and no
/// duplicate doc_id.
struct RetrievalList {
    std::string query_id;
    std::vector<RankedEntry> entries;
};

struct QueryRecord {
    QueryInstance query;
    RetrievalList list;
};

/// A retrieval run: per-query question, gold answers, and ranked documents.
/// File format is JSON Lines, one object per query:
///   {"query_id", "question", "answers": [...],
///    "docs": [{"doc_id", "rank", "score"}, ...]}
class Run {
public:
    Run() = default;

    static Run load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// Validates both invariant sets (query and list) before accepting.
    void add(QueryRecord record);

    std::size_t size() const { return records_.size(); }
    const std::vector<QueryRecord>& records() const { return records_; }
    bool contains(std::string_view query_id) const;
    const QueryRecord& get(std::string_view query_id) const;

private:
    std::vector<QueryRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// First k doc_ids in rank order. k must not exceed the list depth.
std::vector<std::string> top_k(const RetrievalList& list, std::size_t k);

/// The record's first k documents resolved through the corpus.
std::vector<Document> top_k_documents(const QueryRecord& record, const Corpus& corpus, int k);

/// Uniform draw over entries with rank > cutoff.
const RankedEntry& sample_lower_ranked(const RetrievalList& list, int cutoff, Rng& rng);

/// Okapi BM25 over title + body tokens, built once per corpus. Scores are
/// summed over unique query terms with the non-negative idf variant
/// ln(1 + (N - df + 0.5) / (df + 0.5)); ties break by ascending doc_id.
class Bm25Index {
public:
    explicit Bm25Index(const Corpus& corpus, double k1 = 1.2, double b = 0.75);

    /// Ranked list of min(depth, corpus size) documents, zero-score documents
    /// included. Deterministic for a fixed index and question.
    RetrievalList search(std::string_view question, std::size_t depth,
                         std::string_view query_id = "") const;

private:
    struct Posting {
        uint32_t doc = 0;
        uint32_t tf = 0;
    };

    const Corpus* corpus_;
    double k1_;
    double b_;
    double avg_len_ = 0.0;
    std::vector<uint32_t> doc_len_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

}  // namespace ragstress
