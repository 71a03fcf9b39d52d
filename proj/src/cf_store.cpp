#include "ragstress/cf_store.hpp"

#include "ragstress/errors.hpp"
#include "ragstress/io.hpp"

namespace ragstress {

std::string CounterfactualStore::key(std::string_view query_id, std::string_view doc_id) {
    std::string k;
    k.reserve(query_id.size() + doc_id.size() + 1);
    k.append(query_id);
    k.push_back('\x1f');  // unit separator; cannot appear in JSON string keys we emit
    k.append(doc_id);
    return k;
}

CounterfactualStore CounterfactualStore::load(const std::filesystem::path& path) {
    CounterfactualStore store;
    for_each_jsonl(path, [&](std::size_t line_no, const Json& j) {
        Entry entry;
        try {
            entry.query_id = j.at("query_id").get<std::string>();
            entry.doc_id = j.at("doc_id").get<std::string>();
            entry.wrong_answer = j.at("wrong_answer").get<std::string>();
            entry.rewritten_text = j.at("rewritten_text").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path.string() + " line " + std::to_string(line_no) +
                              ": bad store record (" + e.what() + ")");
        }
        try {
            store.put(std::move(entry));
        } catch (const InputError& e) {
            throw FormatError(path.string() + " line " + std::to_string(line_no) + ": " +
                              e.what());
        }
    });
    return store;
}

CounterfactualStore CounterfactualStore::load_or_empty(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return {};
    return load(path);
}

void CounterfactualStore::save(const std::filesystem::path& path) const {
    JsonlWriter writer(path);
    for (const Entry& entry : entries_) {
        writer.write(Json{{"query_id", entry.query_id},
                          {"doc_id", entry.doc_id},
                          {"wrong_answer", entry.wrong_answer},
                          {"rewritten_text", entry.rewritten_text}});
    }
    writer.close();
}

void CounterfactualStore::put(Entry entry) {
    auto wa = wrong_answers_.find(entry.query_id);
    if (wa != wrong_answers_.end() && wa->second != entry.wrong_answer) {
        throw InputError("query " + entry.query_id +
                         ": conflicting wrong answers (\"" + wa->second + "\" vs \"" +
                         entry.wrong_answer + "\")");
    }
    auto [it, inserted] = by_pair_.emplace(key(entry.query_id, entry.doc_id), entries_.size());
    if (!inserted) {
        throw InputError("duplicate rewrite for query " + entry.query_id + ", document " +
                         entry.doc_id);
    }
    wrong_answers_[entry.query_id] = entry.wrong_answer;
    entries_.push_back(std::move(entry));
}

bool CounterfactualStore::has_rewrite(std::string_view query_id, std::string_view doc_id) const {
    return by_pair_.find(key(query_id, doc_id)) != by_pair_.end();
}

const std::string* CounterfactualStore::find_rewrite(std::string_view query_id,
                                                     std::string_view doc_id) const {
    auto it = by_pair_.find(key(query_id, doc_id));
    if (it == by_pair_.end()) return nullptr;
    return &entries_[it->second].rewritten_text;
}

const std::string* CounterfactualStore::find_wrong_answer(std::string_view query_id) const {
    auto it = wrong_answers_.find(std::string(query_id));
    if (it == wrong_answers_.end()) return nullptr;
    return &it->second;
}

}  // namespace ragstress
