#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tabtext/data_model.hpp"

namespace tabtext {

enum class MissingPolicy { Exclude, EncodeMissing, ZeroPad, KeepOriginal };
enum class CombineMode { SeparateEmbeddings, SingleParagraph };

inline constexpr MissingPolicy kAllMissingPolicies[] = {
    MissingPolicy::Exclude, MissingPolicy::EncodeMissing, MissingPolicy::ZeroPad,
    MissingPolicy::KeepOriginal};

std::string_view to_string(MissingPolicy policy);
std::string_view to_string(CombineMode mode);
MissingPolicy parse_missing_policy(std::string_view text);
CombineMode parse_combine_mode(std::string_view text);

struct SerializationConfig {
  MissingPolicy missing_policy = MissingPolicy::EncodeMissing;
  bool include_meta = true;
  bool descriptive = false;
  CombineMode combine_sources = CombineMode::SeparateEmbeddings;

  friend bool operator==(const SerializationConfig&, const SerializationConfig&) = default;
};

// Short stable identifier, e.g. "EncodeMissing/meta/terse/separate".
std::string describe(const SerializationConfig& config);

// The 4 x 2 x 2 representation grid (combine mode taken from `base`), or the
// 32-point grid when `with_combine_axis` is set. Order is fixed: policy, then
// meta (on before off), then descriptiveness (on before off), then combine mode.
std::vector<SerializationConfig> representation_grid(bool with_combine_axis = false,
                                                     const SerializationConfig& base = {});

// "label is value" fragment for one cell; nullopt when the policy drops it.
std::optional<std::string> serialize_cell(const ColumnSpec& column, const CellValue& cell,
                                          const SerializationConfig& config);

// "Title: description. " (description part omitted when empty); "" without a title or description.
std::string meta_prefix(const TableMeta& meta);

// One sentence per row: fragments joined by "; " and terminated by ".".
std::string serialize_row(const TableSchema& schema, const Row& row,
                          const SerializationConfig& config);

using CombinedText = std::variant<std::vector<std::string>, std::string>;

// SingleParagraph joins sentences with one space in the given order;
// SeparateEmbeddings returns the sentences unchanged.
CombinedText combine_sources(const std::vector<std::pair<std::string, std::string>>& texts,
                             const SerializationConfig& config);

}  // namespace tabtext
