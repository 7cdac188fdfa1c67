// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Labeled point sets: CSV loading, min-max normalization and stratified
// folds. Point IDs are row indices and are the identity used by every
// downstream ID set.

#ifndef ANOPACK_DATASET_HPP_
#define ANOPACK_DATASET_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "anopack/common.hpp"

namespace anopack {

enum class Label : std::uint8_t { kNormal = 0, kAnomalous = 1 };

// Per-feature raw (min, max) used to map normalized coordinates back to the
// units of the input file.
struct NormalizationRecord {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<bool> degenerate;

  std::size_t dims() const { return min.size(); }

  double to_raw(std::size_t feature, double normalized) const {
    if (degenerate[feature]) return min[feature];
    return min[feature] + normalized * (max[feature] - min[feature]);
  }

  double to_normalized(std::size_t feature, double raw) const {
    if (degenerate[feature]) return 0.0;
    return (raw - min[feature]) / (max[feature] - min[feature]);
  }
};

class LabeledDataset {
 public:
  LabeledDataset() = default;

  // `values` is row-major with rows.size()==labels.size(); throws
  // InputError when a class is empty or the shape is inconsistent.
  LabeledDataset(std::vector<double> values, std::vector<Label> labels,
                 std::vector<std::string> feature_names,
                 std::optional<NormalizationRecord> normalization = std::nullopt)
      : values_(std::move(values)),
        labels_(std::move(labels)),
        feature_names_(std::move(feature_names)),
        normalization_(std::move(normalization)) {
    const std::size_t d = feature_names_.size();
    if (d == 0) throw InputError("dataset has no feature columns");
    if (labels_.empty()) throw InputError("dataset has zero rows");
    if (values_.size() != labels_.size() * d)
      throw InputError("row width does not match the feature count");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      (labels_[i] == Label::kAnomalous ? anomaly_ids_ : normal_ids_).push_back(i);
    }
    if (anomaly_ids_.empty()) throw InputError("dataset has no anomalous points");
    if (normal_ids_.empty()) throw InputError("dataset has no normal points");
    if (normalization_) {
      if (normalization_->dims() != d)
        throw InputError("normalization record width does not match features");
      for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0))
          throw InputError("normalized coordinate outside [0,1]");
      }
    }
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t dims() const { return feature_names_.size(); }
  std::size_t anomaly_count() const { return anomaly_ids_.size(); }
  std::size_t normal_count() const { return normal_ids_.size(); }

  std::span<const double> point(PointId i) const {
    return {values_.data() + i * dims(), dims()};
  }
  double value(PointId i, std::size_t feature) const {
    return values_[i * dims() + feature];
  }
  Label label(PointId i) const { return labels_[i]; }
  bool is_anomaly(PointId i) const { return labels_[i] == Label::kAnomalous; }

  const IdList& anomaly_ids() const { return anomaly_ids_; }
  const IdList& normal_ids() const { return normal_ids_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<double>& values() const { return values_; }

  bool is_normalized() const { return normalization_.has_value(); }
  const NormalizationRecord& normalization() const {
    if (!normalization_) throw InputError("dataset is not normalized");
    return *normalization_;
  }
  bool degenerate(std::size_t feature) const {
    return normalization_ && normalization_->degenerate[feature];
  }

  // Rows `ids` (in that order) as a new dataset; keeps the normalization
  // record so rules still report in the original raw units.
  LabeledDataset subset(std::span<const PointId> ids) const {
    std::vector<double> values;
    values.reserve(ids.size() * dims());
    std::vector<Label> labels;
    labels.reserve(ids.size());
    for (PointId id : ids) {
      auto row = point(id);
      values.insert(values.end(), row.begin(), row.end());
      labels.push_back(labels_[id]);
    }
    return LabeledDataset(std::move(values), std::move(labels), feature_names_,
                          normalization_);
  }

 private:
  std::vector<double> values_;
  std::vector<Label> labels_;
  std::vector<std::string> feature_names_;
  std::optional<NormalizationRecord> normalization_;
  IdList anomaly_ids_;
  IdList normal_ids_;
};

namespace csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline std::optional<double> parse_real(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(out))
    return std::nullopt;
  return out;
}

// Header plus numeric body of a CSV file. Row numbers reported in errors
// are 1-based data rows (the header is not counted).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw InputError("missing header row: " + path);
  for (auto cell : split(line)) table.header.emplace_back(cell);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw InputError("row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(table.header.size()));
    }
    std::vector<std::string> out;
    out.reserve(cells.size());
    for (auto c : cells) out.emplace_back(c);
    table.rows.push_back(std::move(out));
  }
  return table;
}

}  // namespace csv

// Reads a CSV with a header row. Every column but `label_column` must be
// numeric; rows whose label equals `anomaly_value` are anomalous.
inline LabeledDataset load_csv(const std::string& path, const std::string& label_column,
                               const std::string& anomaly_value) {
  const csv::Table table = csv::read_table(path);
  const auto matches = std::count(table.header.begin(), table.header.end(), label_column);
  if (matches == 0) throw InputError("label column '" + label_column + "' not found");
  if (matches > 1) throw InputError("label column '" + label_column + "' is ambiguous");
  if (table.rows.empty()) throw InputError("file has zero data rows: " + path);

  const std::size_t label_index = static_cast<std::size_t>(
      std::find(table.header.begin(), table.header.end(), label_column) -
      table.header.begin());
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (c != label_index) names.push_back(table.header[c]);

  std::vector<double> values;
  values.reserve(table.rows.size() * names.size());
  std::vector<Label> labels;
  labels.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_index) continue;
      auto v = csv::parse_real(cells[c]);
      if (!v) {
        throw InputError("non-numeric value '" + cells[c] + "' at row " +
                         std::to_string(r + 1) + ", column " + table.header[c]);
      }
      values.push_back(*v);
    }
    labels.push_back(cells[label_index] == anomaly_value ? Label::kAnomalous
                                                         : Label::kNormal);
  }
  return LabeledDataset(std::move(values), std::move(labels), std::move(names));
}

// Global min-max scaling over all points. Constant features map to 0 and are
// flagged degenerate. Applying this to an already normalized dataset leaves
// the coordinates unchanged and composes the records.
inline LabeledDataset normalize(const LabeledDataset& raw) {
  const std::size_t m = raw.size();
  const std::size_t d = raw.dims();
  NormalizationRecord local{std::vector<double>(d), std::vector<double>(d),
                            std::vector<bool>(d, false)};
  for (std::size_t f = 0; f < d; ++f) {
    double lo = raw.value(0, f);
    double hi = lo;
    for (PointId i = 1; i < m; ++i) {
      lo = std::min(lo, raw.value(i, f));
      hi = std::max(hi, raw.value(i, f));
    }
    local.min[f] = lo;
    local.max[f] = hi;
    local.degenerate[f] = !(hi > lo);
  }

  std::vector<double> values(m * d);
  for (PointId i = 0; i < m; ++i) {
    for (std::size_t f = 0; f < d; ++f) {
      double v = local.to_normalized(f, raw.value(i, f));
      values[i * d + f] = std::clamp(v, 0.0, 1.0);
    }
  }

  NormalizationRecord record = local;
  if (raw.is_normalized()) {
    const auto& prior = raw.normalization();
    for (std::size_t f = 0; f < d; ++f) {
      record.min[f] = prior.to_raw(f, local.min[f]);
      record.max[f] = prior.to_raw(f, local.max[f]);
      record.degenerate[f] = prior.degenerate[f] || local.degenerate[f];
    }
  }
  return LabeledDataset(std::move(values), raw.labels(), raw.feature_names(),
                        std::move(record));
}

struct Fold {
  IdList train;
  IdList test;
};

// Stratified k-fold partition: anomalies and normals are shuffled separately
// and dealt round-robin. With fewer anomalies than folds, switches to
// leave-one-out over the anomalies (one split per anomaly).
inline std::vector<Fold> stratified_folds(const LabeledDataset& data, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  if (k > data.size()) throw std::invalid_argument("fold count exceeds point count");
  std::mt19937_64 rng(seed);
  IdList anomalies = data.anomaly_ids();
  IdList normals = data.normal_ids();
  std::shuffle(anomalies.begin(), anomalies.end(), rng);
  std::shuffle(normals.begin(), normals.end(), rng);

  const std::size_t folds = anomalies.size() < k ? anomalies.size() : k;
  std::vector<IdList> tests(folds);
  for (std::size_t i = 0; i < anomalies.size(); ++i) tests[i % folds].push_back(anomalies[i]);
  for (std::size_t i = 0; i < normals.size(); ++i) tests[i % folds].push_back(normals[i]);

  std::vector<Fold> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::sort(tests[f].begin(), tests[f].end());
    out[f].test = tests[f];
    for (std::size_t g = 0; g < folds; ++g)
      if (g != f) out[f].train.insert(out[f].train.end(), tests[g].begin(), tests[g].end());
    std::sort(out[f].train.begin(), out[f].train.end());
  }
  return out;
}

}  // namespace anopack

#endif  // ANOPACK_DATASET_HPP_
