#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ragstress/rng.hpp"

namespace ragstress {

/// One corpus passage. doc_id is opaque, case-sensitive text; body is
/// non-empty after whitespace trim.
struct Document {
    std::string doc_id;
    std::string title;
    std::string body;

    bool operator==(const Document&) const = default;
};

/// Immutable after load; iteration order is load order.
class Corpus {
public:
    Corpus() = default;

    /// Read a TSV corpus: columns id<TAB>text<TAB>title, one document per
    /// line, UTF-8, LF. A header row is skipped when its first cell is
    /// non-numeric. Extra columns beyond the third are ignored.
    static Corpus load_tsv(const std::filesystem::path& path);

    /// Write back as id<TAB>text<TAB>title with an "id	text	title" header.
    void save_tsv(const std::filesystem::path& path) const;

    void add(Document doc);

    std::size_t size() const { return docs_.size(); }
    const std::vector<Document>& documents() const { return docs_; }
    const Document& at(std::size_t pos) const { return docs_.at(pos); }

    bool contains(std::string_view doc_id) const;
    const Document& get(std::string_view doc_id) const;

    /// Uniform draw over documents whose id is not in `exclude`. Rejection
    /// sampling in the common case, a materialized eligible list when the
    /// exclude set covers more than half the corpus.
    const Document& sample_uniform(Rng& rng,
                                   const std::unordered_set<std::string>& exclude) const;

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace ragstress
