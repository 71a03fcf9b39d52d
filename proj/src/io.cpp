#include "ragstress/io.hpp"

#include <fstream>
#include <sstream>

#include "ragstress/errors.hpp"

namespace ragstress {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open file: " + path.string());
    }
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot write file: " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw FormatError("short write: " + path.string());
    }
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const Json&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open file: " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Json record;
        try {
            record = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(path.string() + " line " + std::to_string(line_no) +
                              ": invalid JSON (" + e.what() + ")");
        }
        fn(line_no, record);
    }
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : path_(path) {}

void JsonlWriter::write(const Json& record) {
    buffer_ += record.dump();
    buffer_ += '\n';
}

void JsonlWriter::close() {
    if (closed_) return;
    write_file(path_, buffer_);
    closed_ = true;
}

}  // namespace ragstress
