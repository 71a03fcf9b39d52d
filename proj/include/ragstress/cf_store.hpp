#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ragstress {

/// Cache of counterfactual rewrites, keyed by (query_id, parent doc_id),
/// plus one generated wrong answer per query. Persisted as JSON Lines
/// {"query_id", "doc_id", "wrong_answer", "rewritten_text"} so expensive
/// LLM work can be resumed.
class CounterfactualStore {
public:
    struct Entry {
        std::string query_id;
        std::string doc_id;
        std::string wrong_answer;
        std::string rewritten_text;
    };

    CounterfactualStore() = default;

    static CounterfactualStore load(const std::filesystem::path& path);
    /// Empty store when the file does not exist.
    static CounterfactualStore load_or_empty(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// Rejects a wrong answer that conflicts with one already recorded for
    /// the query, and duplicate (query_id, doc_id) keys.
    void put(Entry entry);

    bool has_rewrite(std::string_view query_id, std::string_view doc_id) const;
    const std::string* find_rewrite(std::string_view query_id, std::string_view doc_id) const;
    const std::string* find_wrong_answer(std::string_view query_id) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    static std::string key(std::string_view query_id, std::string_view doc_id);

    std::vector<Entry> entries_;  // insertion order, preserved on save
    std::unordered_map<std::string, std::size_t> by_pair_;
    std::unordered_map<std::string, std::string> wrong_answers_;
};

}  // namespace ragstress
