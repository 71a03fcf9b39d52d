#include "ragstress/corpus.hpp"

#include <fstream>

#include "ragstress/errors.hpp"
#include "ragstress/io.hpp"
#include "ragstress/text.hpp"

namespace ragstress {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (unsigned char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            cells.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return cells;
}

void check_tsv_safe(const std::string& field, const std::string& what,
                    const std::string& doc_id) {
    if (field.find('\t') != std::string::npos || field.find('\n') != std::string::npos) {
        throw FormatError("document " + doc_id + ": " + what +
                          " contains a tab or newline and cannot be written as TSV");
    }
}

}  // namespace

Corpus Corpus::load_tsv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open corpus file: " + path.string());
    }
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_tabs(line);
        if (first) {
            first = false;
            if (!all_digits(strip(cells[0]))) continue;  // header row
        }
        if (cells.size() < 3) {
            throw FormatError(path.string() + " line " + std::to_string(line_no) +
                              ": expected 3 tab-separated columns (id, text, title), got " +
                              std::to_string(cells.size()));
        }
        Document doc{std::string(cells[0]), std::string(cells[2]), std::string(cells[1])};
        if (doc.doc_id.empty()) {
            throw FormatError(path.string() + " line " + std::to_string(line_no) +
                              ": empty document id");
        }
        if (strip(doc.body).empty()) {
            throw FormatError(path.string() + " line " + std::to_string(line_no) +
                              ": empty text for document " + doc.doc_id);
        }
        if (corpus.contains(doc.doc_id)) {
            throw FormatError(path.string() + " line " + std::to_string(line_no) +
                              ": duplicate document id \"" + doc.doc_id + "\"");
        }
        corpus.add(std::move(doc));
    }
    return corpus;
}

void Corpus::save_tsv(const std::filesystem::path& path) const {
    std::string out = "id\ttext\ttitle\n";
    for (const Document& doc : docs_) {
        check_tsv_safe(doc.doc_id, "id", doc.doc_id);
        check_tsv_safe(doc.body, "text", doc.doc_id);
        check_tsv_safe(doc.title, "title", doc.doc_id);
        out += doc.doc_id;
        out += '\t';
        out += doc.body;
        out += '\t';
        out += doc.title;
        out += '\n';
    }
    write_file(path, out);
}

void Corpus::add(Document doc) {
    if (doc.doc_id.empty()) {
        throw InputError("document id must be non-empty");
    }
    if (strip(doc.body).empty()) {
        throw InputError("document " + doc.doc_id + ": body must be non-empty");
    }
    auto [it, inserted] = index_.emplace(doc.doc_id, docs_.size());
    if (!inserted) {
        throw InputError("duplicate document id \"" + doc.doc_id + "\"");
    }
    docs_.push_back(std::move(doc));
}

bool Corpus::contains(std::string_view doc_id) const {
    return index_.find(std::string(doc_id)) != index_.end();
}

const Document& Corpus::get(std::string_view doc_id) const {
    auto it = index_.find(std::string(doc_id));
    if (it == index_.end()) {
        throw NotFoundError("document not found: \"" + std::string(doc_id) + "\"");
    }
    return docs_[it->second];
}

const Document& Corpus::sample_uniform(Rng& rng,
                                       const std::unordered_set<std::string>& exclude) const {
    std::size_t excluded_here = 0;
    for (const std::string& id : exclude) {
        if (contains(id)) ++excluded_here;
    }
    if (excluded_here >= docs_.size()) {
        throw ExhaustedError("sample_uniform: no eligible document (corpus size " +
                             std::to_string(docs_.size()) + ", excluded " +
                             std::to_string(excluded_here) + ")");
    }
    if (exclude.size() > docs_.size() / 2) {
        std::vector<std::size_t> eligible;
        eligible.reserve(docs_.size() - excluded_here);
        for (std::size_t i = 0; i < docs_.size(); ++i) {
            if (exclude.find(docs_[i].doc_id) == exclude.end()) eligible.push_back(i);
        }
        return docs_[eligible[rng.below(eligible.size())]];
    }
    for (;;) {
        const Document& doc = docs_[rng.below(docs_.size())];
        if (exclude.find(doc.doc_id) == exclude.end()) return doc;
    }
}

}  // namespace ragstress
