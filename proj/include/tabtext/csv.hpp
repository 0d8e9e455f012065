#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tabtext::csv {

struct Record {
  std::size_t line = 0;  // physical line the record starts on, 1-based
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may hold delimiters, doubled quotes and
// newlines. Accepts LF or CRLF line endings and a leading UTF-8 BOM.
// Blank lines are skipped. Throws ParseError on an unterminated quote.
std::vector<Record> read(std::string_view text, char delimiter = ',');

// Quotes a field only when it holds the delimiter, a quote, CR or LF.
std::string escape(std::string_view field, char delimiter = ',');

std::string format_record(const std::vector<std::string>& fields, char delimiter = ',');

}  // namespace tabtext::csv
