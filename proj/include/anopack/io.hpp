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

// Artifact formats: packing documents, cost traces, score dumps, the rule
// report, lattice dumps and configuration files.

#ifndef ANOPACK_IO_HPP_
#define ANOPACK_IO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "anopack/common.hpp"
#include "anopack/dataset.hpp"
#include "anopack/evaluate.hpp"
#include "anopack/lattice.hpp"
#include "anopack/mdl.hpp"
#include "anopack/pipeline.hpp"
#include "anopack/refine.hpp"
#include "anopack/select.hpp"

namespace anopack {

using Json = nlohmann::ordered_json;

inline constexpr int kPackingVersion = 1;

// Everything needed to reproduce detection and the rule report without the
// training data.
struct PackingDocument {
  int version = kPackingVersion;
  std::uint64_t seed = 0;
  std::size_t d = 0;
  std::size_t m = 0;
  double log2_f = kDefaultLog2F;
  std::vector<std::string> feature_names;
  NormalizationRecord normalization;
  std::vector<Pack> packs;
  IdList outlier_ids;
  double total_bits = 0.0;
  double naive_bits = 0.0;
  double savings_percent = 0.0;
};

inline PackingDocument make_document(const ExplainResult& result, const LabeledDataset& data,
                                     std::uint64_t seed) {
  PackingDocument doc;
  doc.seed = seed;
  doc.d = data.dims();
  doc.m = data.size();
  doc.log2_f = result.encoding.log2_f;
  doc.feature_names = data.feature_names();
  doc.normalization = data.normalization();
  doc.packs = result.packing;
  doc.outlier_ids = result.cost.outlier_ids;
  doc.total_bits = result.cost.total_bits;
  doc.naive_bits = result.cost.naive_bits;
  doc.savings_percent = result.cost.savings_percent;
  return doc;
}

inline Json signature_json(const Signature& sig) {
  Json rules = Json::array();
  for (const auto& r : sig.rules) {
    rules.push_back({{"feature", r.name},
                     {"normalized", {r.normalized.lb, r.normalized.ub}},
                     {"raw", {r.raw.lb, r.raw.ub}},
                     {"center", r.center},
                     {"radius", r.radius},
                     {"degenerate", r.degenerate}});
  }
  return {{"rules", std::move(rules)}, {"mass", sig.mass}, {"impurity", sig.impurity}};
}

inline Json to_json(const PackingDocument& doc) {
  Json packs = Json::array();
  for (const auto& p : doc.packs) {
    Json names = Json::array();
    for (std::size_t f : p.params.subspace) names.push_back(doc.feature_names.at(f));
    packs.push_back({{"features", std::move(names)},
                     {"center", p.shape.center},
                     {"radii", p.shape.radii},
                     {"u", p.params.u},
                     {"w", p.params.w},
                     {"w0", p.params.w0},
                     {"mass", p.mass()},
                     {"impurity", p.impurity()},
                     {"anomaly_ids", p.covered_anomalies},
                     {"normal_exception_ids", p.enclosed_normals},
                     {"provenance",
                      {{"rectangle", p.provenance.rectangle},
                       {"alpha", p.provenance.alpha},
                       {"lambda", p.provenance.lambda}}},
                     {"signature",
                      signature_json(feature_rules(p, doc.normalization, doc.feature_names))}});
  }
  std::vector<int> degenerate(doc.normalization.degenerate.begin(),
                              doc.normalization.degenerate.end());
  return {{"version", doc.version},
          {"seed", doc.seed},
          {"encoding", {{"d", doc.d}, {"m", doc.m}, {"log2_f", doc.log2_f}}},
          {"feature_names", doc.feature_names},
          {"normalization",
           {{"min", doc.normalization.min},
            {"max", doc.normalization.max},
            {"degenerate", degenerate}}},
          {"packs", std::move(packs)},
          {"outlier_ids", doc.outlier_ids},
          {"total_bits", doc.total_bits},
          {"naive_bits", doc.naive_bits},
          {"savings_percent", doc.savings_percent}};
}

inline std::string serialize(const PackingDocument& doc) { return to_json(doc).dump(2) + "\n"; }

namespace detail {

template <typename T>
T field(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw SchemaError(std::string("packing: missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("packing: field '") + key + "' has the wrong type");
  }
}

inline bool close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// Rebuilds a document from JSON. The ellipsoid is recomputed from (u, w, w0)
// and must agree with the stored center and radii.
inline PackingDocument from_json(const Json& j) {
  using detail::field;
  PackingDocument doc;
  doc.version = field<int>(j, "version");
  if (doc.version != kPackingVersion)
    throw SchemaError("packing: unsupported version " + std::to_string(doc.version));
  doc.seed = field<std::uint64_t>(j, "seed");
  const Json enc = field<Json>(j, "encoding");
  doc.d = field<std::size_t>(enc, "d");
  doc.m = field<std::size_t>(enc, "m");
  doc.log2_f = field<double>(enc, "log2_f");
  doc.feature_names = field<std::vector<std::string>>(j, "feature_names");
  if (doc.feature_names.size() != doc.d)
    throw SchemaError("packing: feature_names length differs from encoding.d");
  const Json norm = field<Json>(j, "normalization");
  doc.normalization.min = field<std::vector<double>>(norm, "min");
  doc.normalization.max = field<std::vector<double>>(norm, "max");
  for (int flag : field<std::vector<int>>(norm, "degenerate"))
    doc.normalization.degenerate.push_back(flag != 0);
  if (doc.normalization.min.size() != doc.d || doc.normalization.max.size() != doc.d ||
      doc.normalization.degenerate.size() != doc.d)
    throw SchemaError("packing: normalization width differs from encoding.d");

  for (const Json& pj : field<Json>(j, "packs")) {
    Pack p;
    for (const auto& name : field<std::vector<std::string>>(pj, "features")) {
      auto it = std::find(doc.feature_names.begin(), doc.feature_names.end(), name);
      if (it == doc.feature_names.end())
        throw SchemaError("packing: pack uses unknown feature '" + name + "'");
      p.params.subspace.push_back(static_cast<std::size_t>(it - doc.feature_names.begin()));
    }
    p.params.u = field<std::vector<double>>(pj, "u");
    p.params.w = field<std::vector<double>>(pj, "w");
    p.params.w0 = field<double>(pj, "w0");
    const std::size_t k = p.params.subspace.size();
    if (k == 0 || p.params.u.size() != k || p.params.w.size() != k)
      throw SchemaError("packing: pack coefficient lengths differ from its feature list");
    auto shape = try_to_ellipsoid(p.params);
    if (!shape) throw SchemaError("packing: pack boundary encloses no region");
    p.shape = std::move(*shape);
    const auto center = field<std::vector<double>>(pj, "center");
    const auto radii = field<std::vector<double>>(pj, "radii");
    if (center.size() != k || radii.size() != k)
      throw SchemaError("packing: center/radii lengths differ from the feature list");
    for (std::size_t z = 0; z < k; ++z) {
      if (!detail::close(center[z], p.shape.center[z]) ||
          !detail::close(radii[z], p.shape.radii[z]))
        throw SchemaError("packing: center/radii inconsistent with boundary coefficients");
    }
    p.covered_anomalies = field<IdList>(pj, "anomaly_ids");
    p.enclosed_normals = field<IdList>(pj, "normal_exception_ids");
    if (field<std::size_t>(pj, "mass") != p.mass() ||
        field<std::size_t>(pj, "impurity") != p.impurity())
      throw SchemaError("packing: mass/impurity disagree with the id lists");
    if (pj.contains("provenance")) {
      const Json& pr = pj.at("provenance");
      p.provenance.rectangle = field<std::size_t>(pr, "rectangle");
      p.provenance.alpha = field<double>(pr, "alpha");
      p.provenance.lambda = field<double>(pr, "lambda");
    }
    doc.packs.push_back(std::move(p));
  }
  doc.outlier_ids = field<IdList>(j, "outlier_ids");
  doc.total_bits = field<double>(j, "total_bits");
  doc.naive_bits = field<double>(j, "naive_bits");
  doc.savings_percent = field<double>(j, "savings_percent");
  return doc;
}

inline PackingDocument parse_packing(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("packing: invalid JSON: ") + e.what());
  }
  return from_json(j);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path);
  out << text;
  if (!out) throw InputError("write failed: " + path);
}

inline PackingDocument read_packing(const std::string& path) {
  return parse_packing(read_file(path));
}

// Shortest decimal text that reads back as the same double.
inline std::string format_real(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string format_sig4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string cost_csv(std::span<const TracePoint> trace) {
  std::string out = "K,bits\n";
  for (const auto& t : trace) out += std::to_string(t.k) + "," + format_real(t.bits) + "\n";
  return out;
}

inline std::string report_text(const PackingDocument& doc) {
  std::ostringstream out;
  out << "packs: " << doc.packs.size() << "\n"
      << "outliers: " << doc.outlier_ids.size() << "\n"
      << "total bits: " << format_sig4(doc.total_bits) << "\n"
      << "naive bits: " << format_sig4(doc.naive_bits) << "\n"
      << "savings: " << format_sig4(doc.savings_percent) << "%\n";
  if (doc.packs.empty()) {
    out << "\nno compressive pattern found\n";
    return out.str();
  }
  std::vector<std::size_t> order(doc.packs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return doc.packs[a].mass() > doc.packs[b].mass();
  });
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Signature sig =
        feature_rules(doc.packs[order[rank]], doc.normalization, doc.feature_names);
    out << "\npack " << rank + 1 << ": mass " << sig.mass << ", impurity " << sig.impurity
        << ", dims " << sig.rules.size() << "\n";
    for (const auto& r : sig.rules) {
      const double c = doc.normalization.to_raw(r.feature, r.center);
      out << "  " << r.name << " in [" << format_sig4(r.raw.lb) << ", "
          << format_sig4(r.raw.ub) << "]  center " << format_sig4(c) << "\n";
    }
  }
  return out.str();
}

inline Json lattice_json(const ExplainResult& result, std::span<const std::string> names) {
  auto rect_json = [&](const HyperRectangle& r) {
    Json sides = Json::array();
    for (const auto& s : r.sides)
      sides.push_back({{"feature", names[s.feature]}, {"interval", {s.interval.lb, s.interval.ub}}});
    return Json{{"sides", std::move(sides)}, {"mass", r.mass}, {"impurity", r.impurity}};
  };
  Json levels = Json::array();
  for (const auto& level : result.lattice.levels) {
    Json lj = Json::array();
    for (const auto& r : level) lj.push_back(rect_json(r));
    levels.push_back(std::move(lj));
  }
  Json accepted = Json::array();
  for (const auto& r : result.lattice.rectangles) accepted.push_back(rect_json(r));
  return {{"ms", result.thresholds.ms},
          {"mu", result.thresholds.mu},
          {"level_cap_hit", result.lattice.level_cap_hit},
          {"levels", std::move(levels)},
          {"rectangles", std::move(accepted)}};
}

// Maps `raw` through a stored record, clamping to [0,1].
inline LabeledDataset apply_normalization(const LabeledDataset& raw,
                                          const NormalizationRecord& record) {
  if (record.dims() != raw.dims()) throw SchemaError("normalization width differs from data");
  std::vector<double> values(raw.size() * raw.dims());
  for (PointId i = 0; i < raw.size(); ++i)
    for (std::size_t f = 0; f < raw.dims(); ++f)
      values[i * raw.dims() + f] = std::clamp(record.to_normalized(f, raw.value(i, f)), 0.0, 1.0);
  return LabeledDataset(std::move(values), raw.labels(), raw.feature_names(), record);
}

struct DetectResult {
  std::vector<double> scores;
  std::vector<int> flags;
  std::optional<std::vector<int>> labels;
  std::optional<double> auprc;  // absent without labels, positives or packs
};

// Scores every row of `table`. Columns are matched to the packing's features
// by name; `label_column` is optional.
inline DetectResult run_detect(const PackingDocument& doc, const csv::Table& table,
                               const std::optional<std::string>& label_column,
                               const std::string& anomaly_value) {
  std::vector<std::size_t> columns;
  for (const auto& name : doc.feature_names) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end())
      throw SchemaError("input lacks feature column '" + name + "' required by the packing");
    columns.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  std::optional<std::size_t> label_index;
  if (label_column) {
    auto it = std::find(table.header.begin(), table.header.end(), *label_column);
    if (it != table.header.end())
      label_index = static_cast<std::size_t>(it - table.header.begin());
  }

  DetectResult out;
  if (label_index) out.labels.emplace();
  std::vector<double> x(doc.d);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    for (std::size_t f = 0; f < doc.d; ++f) {
      auto v = csv::parse_real(cells[columns[f]]);
      if (!v)
        throw InputError("non-numeric value '" + cells[columns[f]] + "' at row " +
                         std::to_string(r + 1) + ", column " + doc.feature_names[f]);
      x[f] = std::clamp(doc.normalization.to_normalized(f, *v), 0.0, 1.0);
    }
    const double s = score_instance(doc.packs, x);
    out.scores.push_back(s);
    out.flags.push_back(!doc.packs.empty() && s >= 0.0 ? 1 : 0);
    if (label_index) out.labels->push_back(cells[*label_index] == anomaly_value ? 1 : 0);
  }
  if (out.labels && !doc.packs.empty() &&
      std::any_of(out.labels->begin(), out.labels->end(), [](int l) { return l != 0; }))
    out.auprc = auprc(out.scores, *out.labels);
  return out;
}

inline std::string scores_csv(const DetectResult& r) {
  std::string out = r.labels ? "id,score,flag,label\n" : "id,score,flag\n";
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    out += std::to_string(i) + "," + format_real(r.scores[i]) + "," + std::to_string(r.flags[i]);
    if (r.labels) out += "," + std::to_string((*r.labels)[i]);
    out += "\n";
  }
  return out;
}

struct ScoresFile {
  std::vector<double> scores;
  std::vector<int> labels;
};

inline ScoresFile read_scores(const std::string& path) {
  const csv::Table t = csv::read_table(path);
  auto col = [&](const char* name) -> std::size_t {
    auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw SchemaError(std::string("scores file lacks column ") + name);
    return static_cast<std::size_t>(it - t.header.begin());
  };
  const std::size_t sc = col("score");
  const std::size_t lc = col("label");
  ScoresFile out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto s = csv::parse_real(t.rows[r][sc]);
    if (!s) throw InputError("bad score at row " + std::to_string(r + 1));
    out.scores.push_back(*s);
    out.labels.push_back(t.rows[r][lc] == "1" ? 1 : 0);
  }
  return out;
}

inline Json interpretability_json(const InterpretabilityReport& r) {
  return {{"num_groups", r.num_groups},
          {"avg_rule_length", r.avg_rule_length},
          {"avg_impurity_fraction", r.avg_impurity_fraction},
          {"avg_interval_width", r.avg_interval_width}};
}

// Applies the keys present in `j` to `config`; unknown keys are rejected.
inline void apply_config(const Json& j, PipelineConfig& config) {
  if (!j.is_object()) throw InputError("config: top level must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "quantiles") config.quantiles = value.get<std::vector<double>>();
      else if (key == "ms") config.ms = value.get<std::size_t>();
      else if (key == "mu") config.mu = value.get<std::size_t>();
      else if (key == "alphas") config.alphas = value.get<std::vector<double>>();
      else if (key == "lambdas") config.lambdas = value.get<std::vector<double>>();
      else if (key == "log2_f") config.log2_f = value.get<double>();
      else if (key == "full_shape_cost") config.full_shape_cost = value.get<bool>();
      else if (key == "margin") config.margin = value.get<double>();
      else if (key == "level_cap") config.level_cap = value.get<std::size_t>();
      else if (key == "k_cap") config.k_cap = value.get<std::size_t>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "workers") config.workers = value.get<std::size_t>();
      else if (key == "solver") {
        const auto s = value.get<std::string>();
        if (s == "interior-point") config.fit_method = FitMethod::kInteriorPoint;
        else if (s == "simplex") config.fit_method = FitMethod::kSimplex;
        else throw InputError("config: unknown solver '" + s + "'");
      } else {
        throw InputError("config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

inline Json config_json(const PipelineConfig& c) {
  Json j = {{"quantiles", c.quantiles},
            {"alphas", c.alphas},
            {"lambdas", c.lambdas},
            {"log2_f", c.log2_f},
            {"full_shape_cost", c.full_shape_cost},
            {"margin", c.margin},
            {"level_cap", c.level_cap},
            {"k_cap", c.k_cap},
            {"seed", c.seed},
            {"solver", c.fit_method == FitMethod::kSimplex ? "simplex" : "interior-point"}};
  if (c.ms) j["ms"] = *c.ms;
  if (c.mu) j["mu"] = *c.mu;
  return j;
}

}  // namespace anopack

#endif  // ANOPACK_IO_HPP_
