#include "ragstress/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ragstress/errors.hpp"
#include "ragstress/io.hpp"
#include "ragstress/text.hpp"

namespace ragstress {

namespace {

void validate_query(const QueryInstance& query) {
    if (query.query_id.empty()) {
        throw FormatError("query with empty query_id");
    }
    if (query.gold_answers.empty()) {
        throw FormatError("query " + query.query_id + ": gold answer list is empty");
    }
    for (const std::string& answer : query.gold_answers) {
        if (strip(answer).empty()) {
            throw FormatError("query " + query.query_id + ": blank gold answer");
        }
    }
}

void validate_list(const RetrievalList& list) {
    std::unordered_set<std::string_view> seen;
    int expected_rank = 1;
    for (const RankedEntry& entry : list.entries) {
        if (entry.rank != expected_rank) {
            throw FormatError("query " + list.query_id + ": rank " +
                              std::to_string(entry.rank) + " where " +
                              std::to_string(expected_rank) +
                              " was expected (ranks must run 1..n without gaps)");
        }
        if (!seen.insert(entry.doc_id).second) {
            throw FormatError("query " + list.query_id + ": duplicate document \"" +
                              entry.doc_id + "\" in retrieval list");
        }
        ++expected_rank;
    }
}

}  // namespace

Run Run::load(const std::filesystem::path& path) {
    Run run;
    for_each_jsonl(path, [&](std::size_t line_no, const Json& j) {
        QueryRecord record;
        try {
            record.query.query_id = j.at("query_id").get<std::string>();
            record.query.question = j.at("question").get<std::string>();
            record.query.gold_answers = j.at("answers").get<std::vector<std::string>>();
            record.list.query_id = record.query.query_id;
            for (const Json& d : j.at("docs")) {
                RankedEntry entry;
                entry.doc_id = d.at("doc_id").get<std::string>();
                entry.rank = d.at("rank").get<int>();
                entry.score = d.at("score").get<double>();
                record.list.entries.push_back(std::move(entry));
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path.string() + " line " + std::to_string(line_no) +
                              ": bad run record (" + e.what() + ")");
        }
        run.add(std::move(record));
    });
    return run;
}

void Run::save(const std::filesystem::path& path) const {
    JsonlWriter writer(path);
    for (const QueryRecord& record : records_) {
        Json docs = Json::array();
        for (const RankedEntry& entry : record.list.entries) {
            docs.push_back(Json{{"doc_id", entry.doc_id},
                                {"rank", entry.rank},
                                {"score", entry.score}});
        }
        writer.write(Json{{"query_id", record.query.query_id},
                          {"question", record.query.question},
                          {"answers", record.query.gold_answers},
                          {"docs", std::move(docs)}});
    }
    writer.close();
}

void Run::add(QueryRecord record) {
    validate_query(record.query);
    if (record.list.query_id != record.query.query_id) {
        throw FormatError("query " + record.query.query_id +
                          ": retrieval list is tagged with a different query_id");
    }
    validate_list(record.list);
    auto [it, inserted] = index_.emplace(record.query.query_id, records_.size());
    if (!inserted) {
        throw FormatError("duplicate query_id \"" + record.query.query_id + "\"");
    }
    records_.push_back(std::move(record));
}

bool Run::contains(std::string_view query_id) const {
    return index_.find(std::string(query_id)) != index_.end();
}

const QueryRecord& Run::get(std::string_view query_id) const {
    auto it = index_.find(std::string(query_id));
    if (it == index_.end()) {
        throw NotFoundError("query not found: \"" + std::string(query_id) + "\"");
    }
    return records_[it->second];
}

std::vector<std::string> top_k(const RetrievalList& list, std::size_t k) {
    if (k == 0) {
        throw InputError("top_k: k must be positive");
    }
    if (k > list.entries.size()) {
        throw InputError("top_k: insufficient depth for query " + list.query_id +
                         " (k=" + std::to_string(k) + ", list has " +
                         std::to_string(list.entries.size()) + " entries)");
    }
    std::vector<std::string> ids;
    ids.reserve(k);
    for (std::size_t i = 0; i < k; ++i) ids.push_back(list.entries[i].doc_id);
    return ids;
}

std::vector<Document> top_k_documents(const QueryRecord& record, const Corpus& corpus, int k) {
    if (k < 1) {
        throw InputError("top_k: k must be positive");
    }
    std::vector<Document> docs;
    docs.reserve(static_cast<std::size_t>(k));
    for (const std::string& doc_id : top_k(record.list, static_cast<std::size_t>(k))) {
        docs.push_back(corpus.get(doc_id));
    }
    return docs;
}

const RankedEntry& sample_lower_ranked(const RetrievalList& list, int cutoff, Rng& rng) {
    if (cutoff < 1) {
        throw InputError("sample_lower_ranked: cutoff must be positive");
    }
    // ranks are contiguous from 1, so the tail starts at index `cutoff`
    const auto tail_begin = static_cast<std::size_t>(cutoff);
    if (tail_begin >= list.entries.size()) {
        throw ExhaustedError("sample_lower_ranked: query " + list.query_id +
                             " has no entry ranked beyond " + std::to_string(cutoff));
    }
    const std::size_t tail_size = list.entries.size() - tail_begin;
    return list.entries[tail_begin + rng.below(tail_size)];
}

Bm25Index::Bm25Index(const Corpus& corpus, double k1, double b)
    : corpus_(&corpus), k1_(k1), b_(b) {
    doc_len_.resize(corpus.size(), 0);
    uint64_t total_len = 0;
    std::unordered_map<std::string, uint32_t> tf;
    for (std::size_t pos = 0; pos < corpus.size(); ++pos) {
        const Document& doc = corpus.at(pos);
        tf.clear();
        for (const std::string& term : tokenize(doc.title)) ++tf[term];
        for (const std::string& term : tokenize(doc.body)) ++tf[term];
        uint32_t len = 0;
        for (const auto& [term, count] : tf) len += count;
        doc_len_[pos] = len;
        total_len += len;
        for (const auto& [term, count] : tf) {
            postings_[term].push_back({static_cast<uint32_t>(pos), count});
        }
    }
    avg_len_ = corpus.size() > 0 ? static_cast<double>(total_len) / corpus.size() : 0.0;
}

RetrievalList Bm25Index::search(std::string_view question, std::size_t depth,
                                std::string_view query_id) const {
    if (depth == 0) {
        throw InputError("search: depth must be positive");
    }
    std::vector<std::string> terms = tokenize(question);
    if (terms.empty()) {
        throw InputError("search: question is empty after tokenization");
    }
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    const double n_docs = static_cast<double>(corpus_->size());
    std::vector<double> scores(corpus_->size(), 0.0);
    for (const std::string& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        const double df = static_cast<double>(plist.size());
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const Posting& p : plist) {
            const double tf = static_cast<double>(p.tf);
            const double norm =
                avg_len_ > 0.0 ? static_cast<double>(doc_len_[p.doc]) / avg_len_ : 0.0;
            scores[p.doc] += idf * (tf * (k1_ + 1.0)) / (tf + k1_ * (1.0 - b_ + b_ * norm));
        }
    }

    std::vector<uint32_t> order(corpus_->size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b2) {
        if (scores[a] != scores[b2]) return scores[a] > scores[b2];
        return corpus_->at(a).doc_id < corpus_->at(b2).doc_id;
    });

    RetrievalList list;
    list.query_id = std::string(query_id);
    const std::size_t n = std::min(depth, order.size());
    list.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        list.entries.push_back(
            {corpus_->at(order[i]).doc_id, static_cast<int>(i + 1), scores[order[i]]});
    }
    return list;
}

}  // namespace ragstress
