#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ragstress {

// ASCII-only classification; bytes >= 0x80 (UTF-8 continuation etc.) pass
// through untouched so behavior is locale-independent.
bool is_ascii_space(unsigned char c);
bool is_ascii_punct(unsigned char c);
char ascii_lower(unsigned char c);

std::string to_lower_ascii(std::string_view s);

/// Trim ASCII whitespace from both ends.
std::string strip(std::string_view s);

/// Lowercase, delete ASCII punctuation, split on whitespace.
/// Shared by the lexical retriever and answer normalization.
std::vector<std::string> tokenize(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::vector<std::string> split_lines(std::string_view s);

}  // namespace ragstress
