#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coforest/error.hpp"

namespace coforest {

using ValueIndex = std::uint32_t;
using LabelIndex = std::uint32_t;

/// One categorical attribute: its name and the ordered list of possible values.
/// A value's encoding is its position in `vocabulary`.
struct AttributeSchema {
  std::string name;
  std::vector<std::string> vocabulary;

  [[nodiscard]] std::size_t cardinality() const noexcept { return vocabulary.size(); }

  [[nodiscard]] std::optional<ValueIndex> index_of(std::string_view value) const {
    auto it = std::find(vocabulary.begin(), vocabulary.end(), value);
    if (it == vocabulary.end()) return std::nullopt;
    return static_cast<ValueIndex>(it - vocabulary.begin());
  }
};

/// n samples over l categorical attributes, stored row-major as value indices.
/// Ground-truth labels are optional and never consulted by the clustering code.
class CategoricalDataset {
 public:
  CategoricalDataset(std::vector<AttributeSchema> schemas, std::vector<ValueIndex> cells,
                     std::optional<std::vector<LabelIndex>> labels = std::nullopt,
                     std::vector<std::string> label_names = {})
      : schemas_(std::move(schemas)),
        cells_(std::move(cells)),
        labels_(std::move(labels)),
        label_names_(std::move(label_names)) {
    if (schemas_.empty()) throw DataError("dataset has no attributes");
    if (cells_.empty() || cells_.size() % schemas_.size() != 0)
      throw DataError("cell count is not a positive multiple of the attribute count");
    n_ = cells_.size() / schemas_.size();
    for (const auto& s : schemas_) {
      if (s.vocabulary.empty()) throw DataError("attribute '" + s.name + "' has an empty vocabulary");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t r = 0; r < schemas_.size(); ++r) {
        if (at(i, r) >= schemas_[r].cardinality())
          throw DataError("cell index out of range for attribute '" + schemas_[r].name + "'");
      }
    }
    if (labels_) {
      if (labels_->size() != n_) throw DataError("label count does not match sample count");
      if (label_names_.empty()) {
        LabelIndex top = *std::max_element(labels_->begin(), labels_->end());
        for (LabelIndex c = 0; c <= top; ++c) label_names_.push_back(std::to_string(c));
      }
      for (LabelIndex c : *labels_) {
        if (c >= label_names_.size()) throw DataError("label index out of range");
      }
    }
  }

  [[nodiscard]] std::size_t num_samples() const noexcept { return n_; }
  [[nodiscard]] std::size_t num_attributes() const noexcept { return schemas_.size(); }

  [[nodiscard]] ValueIndex at(std::size_t i, std::size_t r) const noexcept {
    return cells_[i * schemas_.size() + r];
  }
  [[nodiscard]] std::span<const ValueIndex> row(std::size_t i) const noexcept {
    return {cells_.data() + i * schemas_.size(), schemas_.size()};
  }
  [[nodiscard]] const std::string& raw(std::size_t i, std::size_t r) const {
    return schemas_[r].vocabulary[at(i, r)];
  }

  [[nodiscard]] const AttributeSchema& schema(std::size_t r) const { return schemas_.at(r); }
  [[nodiscard]] const std::vector<AttributeSchema>& schemas() const noexcept { return schemas_; }
  [[nodiscard]] std::size_t cardinality(std::size_t r) const { return schemas_.at(r).cardinality(); }

  [[nodiscard]] bool has_labels() const noexcept { return labels_.has_value(); }
  [[nodiscard]] const std::vector<LabelIndex>& labels() const {
    if (!labels_) throw DataError("dataset has no ground-truth labels");
    return *labels_;
  }
  [[nodiscard]] const std::vector<std::string>& label_names() const noexcept { return label_names_; }
  [[nodiscard]] std::size_t num_classes() const noexcept { return labels_ ? label_names_.size() : 0; }

 private:
  std::vector<AttributeSchema> schemas_;
  std::vector<ValueIndex> cells_;
  std::optional<std::vector<LabelIndex>> labels_;
  std::vector<std::string> label_names_;
  std::size_t n_ = 0;
};

struct CsvOptions {
  std::optional<std::string> label_column;
  std::string missing_token = "?";
  bool has_header = true;
  char delimiter = ',';
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

// Splits one record. Double-quoted fields may contain the delimiter; a doubled
// quote inside them is a literal quote. Unquoted fields are whitespace-trimmed.
inline std::vector<std::string> split_record(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == delimiter) {
      fields.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  fields.push_back(was_quoted ? field : trim(field));
  return fields;
}

// First-appearance vocabulary builder for one column.
class VocabularyBuilder {
 public:
  ValueIndex encode(const std::string& value) {
    auto [it, inserted] = index_.try_emplace(value, static_cast<ValueIndex>(values_.size()));
    if (inserted) values_.push_back(value);
    return it->second;
  }
  std::vector<std::string> take() { return std::move(values_); }

 private:
  std::unordered_map<std::string, ValueIndex> index_;
  std::vector<std::string> values_;
};

}  // namespace detail

/// Parses delimited text into a dataset. Rows with the missing token in any
/// attribute cell are dropped before vocabularies are built, so every
/// vocabulary entry is supported by at least one surviving row.
inline CategoricalDataset parse_csv(std::istream& in, const CsvOptions& options = {}) {
  std::vector<std::vector<std::string>> records;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    records.push_back(detail::split_record(line, options.delimiter));
  }
  if (records.empty()) throw DataError("input contains no records");

  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (options.has_header) {
    header = records.front();
    first_data = 1;
  } else {
    for (std::size_t c = 0; c < records.front().size(); ++c) header.push_back("c" + std::to_string(c));
  }
  const std::size_t width = header.size();

  std::optional<std::size_t> label_col;
  if (options.label_column) {
    auto it = std::find(header.begin(), header.end(), *options.label_column);
    if (it == header.end()) throw DataError("label column '" + *options.label_column + "' not found");
    label_col = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t num_attributes = width - (label_col ? 1 : 0);
  if (num_attributes == 0) throw DataError("input has no attribute columns");

  std::vector<detail::VocabularyBuilder> vocab(num_attributes);
  detail::VocabularyBuilder label_vocab;
  std::vector<ValueIndex> cells;
  std::vector<LabelIndex> labels;
  for (std::size_t rec = first_data; rec < records.size(); ++rec) {
    const auto& fields = records[rec];
    if (fields.size() != width) {
      std::ostringstream msg;
      msg << "ragged row " << rec + 1 << ": expected " << width << " fields, found " << fields.size();
      throw DataError(msg.str());
    }
    bool missing = false;
    for (std::size_t c = 0; c < width && !missing; ++c) {
      if (c != label_col && fields[c] == options.missing_token) missing = true;
    }
    if (missing) continue;
    for (std::size_t c = 0, r = 0; c < width; ++c) {
      if (c == label_col) {
        labels.push_back(label_vocab.encode(fields[c]));
      } else {
        cells.push_back(vocab[r++].encode(fields[c]));
      }
    }
  }
  if (cells.empty()) throw DataError("dataset is empty after missing-value removal");

  std::vector<AttributeSchema> schemas;
  schemas.reserve(num_attributes);
  for (std::size_t c = 0, r = 0; c < width; ++c) {
    if (c == label_col) continue;
    schemas.push_back({header[c], vocab[r++].take()});
  }
  if (label_col) {
    return CategoricalDataset(std::move(schemas), std::move(cells), std::move(labels), label_vocab.take());
  }
  return CategoricalDataset(std::move(schemas), std::move(cells));
}

inline CategoricalDataset load_csv(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path + "'");
  return parse_csv(in, options);
}

namespace detail {
inline void write_field(std::ostream& out, const std::string& value, char delimiter) {
  if (value.find_first_of(std::string{delimiter, '"', '\n'}) == std::string::npos &&
      value == trim(value)) {
    out << value;
    return;
  }
  out << '"';
  for (char c : value) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}
}  // namespace detail

/// Writes a header row plus one row per sample; labels, when present, go to a
/// trailing column named `label_column`.
inline void write_csv(const CategoricalDataset& ds, std::ostream& out,
                      const std::string& label_column = "class", char delimiter = ',') {
  for (std::size_t r = 0; r < ds.num_attributes(); ++r) {
    if (r) out << delimiter;
    detail::write_field(out, ds.schema(r).name, delimiter);
  }
  if (ds.has_labels()) {
    out << delimiter;
    detail::write_field(out, label_column, delimiter);
  }
  out << '\n';
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    for (std::size_t r = 0; r < ds.num_attributes(); ++r) {
      if (r) out << delimiter;
      detail::write_field(out, ds.raw(i, r), delimiter);
    }
    if (ds.has_labels()) {
      out << delimiter;
      detail::write_field(out, ds.label_names()[ds.labels()[i]], delimiter);
    }
    out << '\n';
  }
}

struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t l = 20;
  std::size_t values_per_attribute = 5;
  std::size_t k_true = 5;
  std::uint64_t seed = 0;
};

/// Planted-cluster generator. Each sample draws its cluster uniformly; each
/// (cluster, attribute) pair owns a categorical distribution whose weights are
/// cubed uniform(0,1) draws, normalized. Values are named v0, v1, ... and
/// vocabularies are in first-appearance order, matching what `load_csv` would
/// build from the written file.
inline CategoricalDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.l == 0 || spec.values_per_attribute == 0 || spec.k_true == 0)
    throw std::invalid_argument("synthetic dataset sizes must all be at least 1");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t m = spec.values_per_attribute;

  // cumulative[(j * l + r) * m + u]
  std::vector<double> cumulative(spec.k_true * spec.l * m);
  for (std::size_t j = 0; j < spec.k_true; ++j) {
    for (std::size_t r = 0; r < spec.l; ++r) {
      double* cdf = cumulative.data() + (j * spec.l + r) * m;
      double total = 0.0;
      for (std::size_t u = 0; u < m; ++u) {
        double w = unit(rng);
        total += w * w * w;
        cdf[u] = total;
      }
      for (std::size_t u = 0; u < m; ++u) cdf[u] /= total;
      cdf[m - 1] = 1.0;
    }
  }

  std::uniform_int_distribution<std::size_t> pick_cluster(0, spec.k_true - 1);
  constexpr ValueIndex kUnseen = ~ValueIndex{0};
  std::vector<std::vector<ValueIndex>> remap(spec.l, std::vector<ValueIndex>(m, kUnseen));
  std::vector<std::vector<std::string>> vocab(spec.l);
  std::vector<LabelIndex> label_remap(spec.k_true, kUnseen);
  std::vector<std::string> label_names;

  std::vector<ValueIndex> cells;
  cells.reserve(spec.n * spec.l);
  std::vector<LabelIndex> labels;
  labels.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::size_t j = pick_cluster(rng);
    if (label_remap[j] == kUnseen) {
      label_remap[j] = static_cast<LabelIndex>(label_names.size());
      label_names.push_back("c" + std::to_string(j));
    }
    labels.push_back(label_remap[j]);
    for (std::size_t r = 0; r < spec.l; ++r) {
      const double* cdf = cumulative.data() + (j * spec.l + r) * m;
      double draw = unit(rng);
      std::size_t u = static_cast<std::size_t>(std::upper_bound(cdf, cdf + m, draw) - cdf);
      if (u >= m) u = m - 1;
      if (remap[r][u] == kUnseen) {
        remap[r][u] = static_cast<ValueIndex>(vocab[r].size());
        vocab[r].push_back("v" + std::to_string(u));
      }
      cells.push_back(remap[r][u]);
    }
  }

  std::vector<AttributeSchema> schemas;
  schemas.reserve(spec.l);
  for (std::size_t r = 0; r < spec.l; ++r) schemas.push_back({"a" + std::to_string(r), std::move(vocab[r])});
  return CategoricalDataset(std::move(schemas), std::move(cells), std::move(labels), std::move(label_names));
}

struct DatasetSummary {
  std::size_t n = 0;
  std::size_t l = 0;
  std::vector<std::size_t> cardinalities;
  std::size_t max_cardinality = 0;  // the largest o_r
  std::size_t num_classes = 0;      // 0 when the dataset has no labels
};

inline DatasetSummary dataset_summary(const CategoricalDataset& ds) {
  DatasetSummary s;
  s.n = ds.num_samples();
  s.l = ds.num_attributes();
  for (const auto& schema : ds.schemas()) {
    s.cardinalities.push_back(schema.cardinality());
    s.max_cardinality = std::max(s.max_cardinality, schema.cardinality());
  }
  s.num_classes = ds.num_classes();
  return s;
}

}  // namespace coforest
