#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "json.hpp"

namespace ragstress {

/// Insertion-ordered JSON so emitted files keep a stable field layout.
using Json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);

/// Write bytes as-is (binary mode, LF endings preserved).
void write_file(const std::filesystem::path& path, std::string_view content);

/// Parse each non-empty line of a JSON Lines file. The callback receives the
/// 1-based line number and the parsed object.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const Json&)>& fn);

class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path);
    void write(const Json& record);
    void close();

private:
    std::string buffer_;
    std::filesystem::path path_;
    bool closed_ = false;
};

}  // namespace ragstress
