#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace tabtext {

enum class ColumnKind { numeric, categorical, binary, free_text, timestamp };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view text);

// Placeholder replaced by the cell's raw value in descriptive templates.
inline constexpr std::string_view kValuePlaceholder = "{value}";

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::string label;  // empty means "use name"
  std::optional<std::string> descriptive_template;
  std::optional<std::string> unit;

  const std::string& display_label() const { return label.empty() ? name : label; }
};

struct TableMeta {
  std::string table_title;
  std::string description;
};

std::vector<std::string> default_missing_tokens();

struct TableSchema {
  std::string name;  // source name; qualifies baseline feature names
  TableMeta meta;
  std::vector<ColumnSpec> columns;
  std::string entity_column;
  std::optional<std::string> time_column;
  char delimiter = ',';
  std::vector<std::string> missing_tokens = default_missing_tokens();

  // Throws ValidationError naming the first violated invariant.
  void validate() const;

  bool is_time_series() const { return time_column.has_value(); }
  std::optional<std::size_t> index_of(std::string_view column) const;
  const ColumnSpec& column(std::string_view name) const;
  std::size_t entity_index() const;
  std::optional<std::size_t> time_index() const;

  // True for the entity and time columns, which never reach sentences or features.
  bool is_key_column(std::size_t index) const;
};

class CellValue {
 public:
  struct Present {
    std::string raw;
    std::optional<double> parsed;
  };
  struct Missing {
    std::string original_token;
  };

  // `parsed` is filled iff raw is a finite number.
  static CellValue present(std::string raw);
  static CellValue missing(std::string original_token);

  bool is_missing() const noexcept { return std::holds_alternative<Missing>(value_); }
  const Present& as_present() const { return std::get<Present>(value_); }
  const Missing& as_missing() const { return std::get<Missing>(value_); }

  // Raw text for Present, original token for Missing.
  const std::string& text() const noexcept;
  std::optional<double> number() const noexcept;

  friend bool operator==(const CellValue& a, const CellValue& b);

 private:
  explicit CellValue(std::variant<Present, Missing> v) : value_(std::move(v)) {}
  std::variant<Present, Missing> value_;
};

bool operator==(const CellValue::Present& a, const CellValue::Present& b);
bool operator==(const CellValue::Missing& a, const CellValue::Missing& b);

// Strict finite-number parse used for CellValue::Present. Surrounding ASCII
// whitespace and a leading '+' are accepted.
std::optional<double> parse_number(std::string_view text) noexcept;

struct Row {
  std::string entity_id;
  std::vector<CellValue> cells;  // aligned with TableSchema::columns
  std::optional<double> timestamp;

  const CellValue& cell(const TableSchema& schema, std::string_view column) const;
};

struct ParseOptions {
  // Overrides the schema's delimiter / missing tokens when set.
  std::optional<char> delimiter;
  std::optional<std::vector<std::string>> missing_tokens;
};

std::vector<Row> parse_table(std::string_view text, const TableSchema& schema,
                             const ParseOptions& options = {});

// Writes rows back as delimiter-separated text with the schema's column order.
std::string write_table(const std::vector<Row>& rows, const TableSchema& schema);

TableSchema schema_from_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const TableSchema& schema);
TableSchema load_schema(const std::string& path);

}  // namespace tabtext
