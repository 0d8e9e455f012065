#include "tabtext/data_model.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "tabtext/csv.hpp"
#include "tabtext/error.hpp"
#include "tabtext/text_util.hpp"

namespace tabtext {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::binary: return "binary";
    case ColumnKind::free_text: return "free_text";
    case ColumnKind::timestamp: return "timestamp";
  }
  return "numeric";
}

ColumnKind parse_column_kind(std::string_view text) {
  for (auto kind : {ColumnKind::numeric, ColumnKind::categorical, ColumnKind::binary,
                    ColumnKind::free_text, ColumnKind::timestamp}) {
    if (to_string(kind) == text) return kind;
  }
  throw ValidationError("unknown column kind '" + std::string(text) + "'");
}

std::vector<std::string> default_missing_tokens() { return {"", "NA", "NaN", "null"}; }

// ---------------------------------------------------------------------------
// TableSchema

void TableSchema::validate() const {
  const std::string where = "schema '" + name + "': ";
  if (name.empty()) throw ValidationError("schema has no table name");
  if (columns.empty()) throw ValidationError(where + "no columns declared");

  std::unordered_set<std::string> seen;
  std::size_t timestamp_columns = 0;
  for (const auto& col : columns) {
    if (col.name.empty()) throw ValidationError(where + "column with empty name");
    if (!seen.insert(col.name).second) {
      throw ValidationError(where + "duplicate column '" + col.name + "'");
    }
    if (col.kind == ColumnKind::timestamp) ++timestamp_columns;
    if (col.display_label().ends_with('.')) {
      throw ValidationError(where + "label of '" + col.name + "' ends with a period");
    }
    if (col.descriptive_template) {
      const auto& tpl = *col.descriptive_template;
      const auto first = tpl.find(kValuePlaceholder);
      if (first == std::string::npos ||
          tpl.find(kValuePlaceholder, first + kValuePlaceholder.size()) != std::string::npos) {
        throw ValidationError(where + "template of '" + col.name + "' must contain exactly one " +
                              std::string(kValuePlaceholder));
      }
    }
  }
  if (timestamp_columns > 1) throw ValidationError(where + "more than one timestamp column");
  if (!index_of(entity_column)) {
    throw ValidationError(where + "entity_column '" + entity_column + "' is not declared");
  }
  if (time_column) {
    const auto idx = index_of(*time_column);
    if (!idx) throw ValidationError(where + "time_column '" + *time_column + "' is not declared");
    if (columns[*idx].kind != ColumnKind::timestamp) {
      throw ValidationError(where + "time_column '" + *time_column + "' must have kind timestamp");
    }
    if (*time_column == entity_column) {
      throw ValidationError(where + "time_column and entity_column coincide");
    }
  } else if (timestamp_columns == 1) {
    throw ValidationError(where + "timestamp column declared without time_column");
  }
}

std::optional<std::size_t> TableSchema::index_of(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return i;
  }
  return std::nullopt;
}

const ColumnSpec& TableSchema::column(std::string_view column_name) const {
  const auto idx = index_of(column_name);
  if (!idx) throw Error("schema '" + name + "' has no column '" + std::string(column_name) + "'");
  return columns[*idx];
}

std::size_t TableSchema::entity_index() const { return *index_of(entity_column); }

std::optional<std::size_t> TableSchema::time_index() const {
  return time_column ? index_of(*time_column) : std::nullopt;
}

bool TableSchema::is_key_column(std::size_t index) const {
  return columns[index].name == entity_column || (time_column && columns[index].name == *time_column);
}

// ---------------------------------------------------------------------------
// CellValue

std::optional<double> parse_number(std::string_view text) noexcept {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  if (text.starts_with('+')) {
    text.remove_prefix(1);
    if (text.starts_with('-') || text.starts_with('+')) return std::nullopt;
  }
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

CellValue CellValue::present(std::string raw) {
  auto parsed = parse_number(raw);
  return CellValue(Present{std::move(raw), parsed});
}

CellValue CellValue::missing(std::string original_token) {
  return CellValue(Missing{std::move(original_token)});
}

const std::string& CellValue::text() const noexcept {
  if (const auto* p = std::get_if<Present>(&value_)) return p->raw;
  return std::get<Missing>(value_).original_token;
}

std::optional<double> CellValue::number() const noexcept {
  if (const auto* p = std::get_if<Present>(&value_)) return p->parsed;
  return std::nullopt;
}

bool operator==(const CellValue::Present& a, const CellValue::Present& b) {
  return a.raw == b.raw && a.parsed == b.parsed;
}
bool operator==(const CellValue::Missing& a, const CellValue::Missing& b) {
  return a.original_token == b.original_token;
}
bool operator==(const CellValue& a, const CellValue& b) { return a.value_ == b.value_; }

const CellValue& Row::cell(const TableSchema& schema, std::string_view column) const {
  const auto idx = schema.index_of(column);
  if (!idx) throw Error("no column '" + std::string(column) + "' in schema '" + schema.name + "'");
  return cells.at(*idx);
}

// ---------------------------------------------------------------------------
// parse / write

std::vector<Row> parse_table(std::string_view text, const TableSchema& schema,
                             const ParseOptions& options) {
  const char delimiter = options.delimiter.value_or(schema.delimiter);
  const auto& tokens = options.missing_tokens ? *options.missing_tokens : schema.missing_tokens;

  const auto records = csv::read(text, delimiter);
  if (records.empty()) throw ParseError(1, "table '" + schema.name + "' has no header row");

  const auto& header = records.front().fields;
  std::unordered_map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < header.size(); ++i) header_index.emplace(header[i], i);

  std::vector<std::size_t> source_field(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto it = header_index.find(schema.columns[c].name);
    if (it == header_index.end()) throw SchemaMismatchError(schema.name, schema.columns[c].name);
    source_field[c] = it->second;
  }

  auto is_missing_token = [&tokens](std::string_view field) {
    for (const auto& token : tokens) {
      if (iequals_ascii(field, token)) return true;
    }
    return false;
  };

  const std::size_t entity_col = schema.entity_index();
  const auto time_col = schema.time_index();

  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& record = records[r];
    if (record.fields.size() != header.size()) {
      throw ParseError(record.line, "expected " + std::to_string(header.size()) + " fields, found " +
                                        std::to_string(record.fields.size()));
    }
    Row row;
    row.cells.reserve(schema.columns.size());
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const auto& field = record.fields[source_field[c]];
      row.cells.push_back(is_missing_token(field) ? CellValue::missing(field)
                                                  : CellValue::present(field));
    }
    const auto& entity = row.cells[entity_col];
    if (entity.is_missing()) throw ParseError(record.line, "missing entity id");
    row.entity_id = entity.text();
    if (time_col) {
      const auto& ts = row.cells[*time_col];
      if (!ts.number()) {
        throw ParseError(record.line, "unparseable timestamp '" + ts.text() + "' in column '" +
                                          *schema.time_column + "'");
      }
      row.timestamp = ts.number();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string write_table(const std::vector<Row>& rows, const TableSchema& schema) {
  std::vector<std::string> fields;
  fields.reserve(schema.columns.size());
  for (const auto& col : schema.columns) fields.push_back(col.name);
  std::string out = csv::format_record(fields, schema.delimiter);
  for (const auto& row : rows) {
    fields.clear();
    for (const auto& cell : row.cells) fields.push_back(cell.text());
    out += csv::format_record(fields, schema.delimiter);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON sidecar

TableSchema schema_from_json(const nlohmann::json& doc) {
  try {
    TableSchema schema;
    schema.name = doc.at("name").get<std::string>();
    if (doc.contains("meta")) {
      const auto& meta = doc.at("meta");
      schema.meta.table_title = meta.value("table_title", "");
      schema.meta.description = meta.value("description", "");
    }
    schema.entity_column = doc.at("entity_column").get<std::string>();
    if (doc.contains("time_column") && !doc.at("time_column").is_null()) {
      schema.time_column = doc.at("time_column").get<std::string>();
    }
    if (doc.contains("delimiter")) {
      const auto delim = doc.at("delimiter").get<std::string>();
      if (delim.size() != 1) throw ValidationError("delimiter must be a single character");
      schema.delimiter = delim[0];
    }
    if (doc.contains("missing_tokens")) {
      schema.missing_tokens = doc.at("missing_tokens").get<std::vector<std::string>>();
    }
    for (const auto& col : doc.at("columns")) {
      ColumnSpec spec;
      spec.name = col.at("name").get<std::string>();
      spec.kind = parse_column_kind(col.at("kind").get<std::string>());
      spec.label = col.value("label", "");
      if (col.contains("descriptive_template") && !col.at("descriptive_template").is_null()) {
        spec.descriptive_template = col.at("descriptive_template").get<std::string>();
      }
      if (col.contains("unit") && !col.at("unit").is_null()) {
        spec.unit = col.at("unit").get<std::string>();
      }
      schema.columns.push_back(std::move(spec));
    }
    schema.validate();
    return schema;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed schema document: ") + e.what());
  }
}

nlohmann::json schema_to_json(const TableSchema& schema) {
  nlohmann::json doc;
  doc["name"] = schema.name;
  doc["meta"] = {{"table_title", schema.meta.table_title},
                 {"description", schema.meta.description}};
  doc["entity_column"] = schema.entity_column;
  if (schema.time_column) doc["time_column"] = *schema.time_column;
  doc["delimiter"] = std::string(1, schema.delimiter);
  doc["missing_tokens"] = schema.missing_tokens;
  auto columns = nlohmann::json::array();
  for (const auto& col : schema.columns) {
    nlohmann::json c{{"name", col.name}, {"kind", std::string(to_string(col.kind))}};
    if (!col.label.empty()) c["label"] = col.label;
    if (col.descriptive_template) c["descriptive_template"] = *col.descriptive_template;
    if (col.unit) c["unit"] = *col.unit;
    columns.push_back(std::move(c));
  }
  doc["columns"] = std::move(columns);
  return doc;
}

TableSchema load_schema(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("schema '" + path + "' is not valid JSON: " + e.what());
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  return schema_from_json(doc);
}

}  // namespace tabtext
