#include "tabtext/serializer.hpp"

#include "tabtext/error.hpp"

namespace tabtext {

std::string_view to_string(MissingPolicy policy) {
  switch (policy) {
    case MissingPolicy::Exclude: return "Exclude";
    case MissingPolicy::EncodeMissing: return "EncodeMissing";
    case MissingPolicy::ZeroPad: return "ZeroPad";
    case MissingPolicy::KeepOriginal: return "KeepOriginal";
  }
  return "EncodeMissing";
}

std::string_view to_string(CombineMode mode) {
  return mode == CombineMode::SingleParagraph ? "SingleParagraph" : "SeparateEmbeddings";
}

MissingPolicy parse_missing_policy(std::string_view text) {
  for (auto policy : kAllMissingPolicies) {
    if (to_string(policy) == text) return policy;
  }
  throw ValidationError("unknown missing policy '" + std::string(text) +
                        "' (expected Exclude, EncodeMissing, ZeroPad or KeepOriginal)");
}

CombineMode parse_combine_mode(std::string_view text) {
  if (text == "SeparateEmbeddings") return CombineMode::SeparateEmbeddings;
  if (text == "SingleParagraph") return CombineMode::SingleParagraph;
  throw ValidationError("unknown combine mode '" + std::string(text) +
                        "' (expected SeparateEmbeddings or SingleParagraph)");
}

std::string describe(const SerializationConfig& config) {
  std::string out(to_string(config.missing_policy));
  out += config.include_meta ? "/meta" : "/no-meta";
  out += config.descriptive ? "/descriptive" : "/terse";
  out += config.combine_sources == CombineMode::SingleParagraph ? "/paragraph" : "/separate";
  return out;
}

std::vector<SerializationConfig> representation_grid(bool with_combine_axis,
                                                     const SerializationConfig& base) {
  std::vector<SerializationConfig> grid;
  for (auto policy : kAllMissingPolicies) {
    for (bool meta : {true, false}) {
      for (bool descriptive : {true, false}) {
        if (with_combine_axis) {
          for (auto mode : {CombineMode::SeparateEmbeddings, CombineMode::SingleParagraph}) {
            grid.push_back({policy, meta, descriptive, mode});
          }
        } else {
          grid.push_back({policy, meta, descriptive, base.combine_sources});
        }
      }
    }
  }
  return grid;
}

std::optional<std::string> serialize_cell(const ColumnSpec& column, const CellValue& cell,
                                          const SerializationConfig& config) {
  const std::string& label = column.display_label();
  if (!cell.is_missing()) {
    const auto& raw = cell.as_present().raw;
    if (config.descriptive && column.descriptive_template) {
      std::string out = *column.descriptive_template;
      const auto at = out.find(kValuePlaceholder);
      if (at != std::string::npos) out.replace(at, kValuePlaceholder.size(), raw);
      return out;
    }
    std::string out = label + " is " + raw;
    if (column.unit) out += " " + *column.unit;
    return out;
  }
  switch (config.missing_policy) {
    case MissingPolicy::Exclude: return std::nullopt;
    case MissingPolicy::EncodeMissing: return label + " is missing";
    case MissingPolicy::ZeroPad: return label + " is 0";
    case MissingPolicy::KeepOriginal: return label + " is " + cell.as_missing().original_token;
  }
  return std::nullopt;
}

std::string meta_prefix(const TableMeta& meta) {
  if (meta.table_title.empty()) {
    return meta.description.empty() ? std::string{} : meta.description + ". ";
  }
  if (meta.description.empty()) return meta.table_title + ". ";
  return meta.table_title + ": " + meta.description + ". ";
}

std::string serialize_row(const TableSchema& schema, const Row& row,
                          const SerializationConfig& config) {
  std::string body;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.is_key_column(c)) continue;
    auto fragment = serialize_cell(schema.columns[c], row.cells.at(c), config);
    if (!fragment) continue;
    if (!body.empty()) body += "; ";
    body += *fragment;
  }
  const std::string prefix = config.include_meta ? meta_prefix(schema.meta) : std::string{};
  if (body.empty()) {
    // Prefix alone, without the separator that would precede a body.
    return prefix.empty() ? prefix : prefix.substr(0, prefix.size() - 1);
  }
  return prefix + body + ".";
}

CombinedText combine_sources(const std::vector<std::pair<std::string, std::string>>& texts,
                             const SerializationConfig& config) {
  if (config.combine_sources == CombineMode::SeparateEmbeddings) {
    std::vector<std::string> out;
    out.reserve(texts.size());
    for (const auto& [source, sentence] : texts) out.push_back(sentence);
    return out;
  }
  std::string paragraph;
  for (const auto& [source, sentence] : texts) {
    if (sentence.empty()) continue;
    if (!paragraph.empty()) paragraph += ' ';
    paragraph += sentence;
  }
  return paragraph;
}

}  // namespace tabtext
