#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tabtext {

// ASCII whitespace as recognised by the chunker and the tokenizers.
constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Number of Unicode code points in a UTF-8 string (continuation bytes are not counted).
std::size_t utf8_length(std::string_view text) noexcept;

// Byte offset of the first `count` code points of `text` (clamped to the end).
std::size_t utf8_prefix_bytes(std::string_view text, std::size_t count) noexcept;

std::string to_lower_ascii(std::string_view text);
bool iequals_ascii(std::string_view a, std::string_view b) noexcept;

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

std::string join(const std::vector<std::string>& parts, std::string_view separator);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace tabtext
