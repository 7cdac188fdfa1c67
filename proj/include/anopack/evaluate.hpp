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

// Detection scoring, ranking metrics, interpretability measures and the
// planted-pattern synthetic generator.

#ifndef ANOPACK_EVALUATE_HPP_
#define ANOPACK_EVALUATE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "anopack/dataset.hpp"
#include "anopack/rectangle.hpp"
#include "anopack/refine.hpp"

namespace anopack {

inline constexpr double kNoPackScore = std::numeric_limits<double>::lowest();

// Largest boundary value over the packs; each pack reads only its own
// subspace coordinates of x.
inline double score_instance(std::span<const Pack> packing, std::span<const double> x) {
  double best = kNoPackScore;
  for (const auto& p : packing) best = std::max(best, p.score(x));
  return best;
}

// Trapezoidal area under precision vs. recall, ranking by descending score
// with ties kept in index order. The curve starts at (recall 0, precision 1).
inline double auprc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  const auto positives = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(),
                                                                [](int l) { return l != 0; }));
  if (positives == 0) throw std::invalid_argument("AUPRC needs at least one positive label");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double area = 0.0;
  double prev_recall = 0.0;
  double prev_precision = 1.0;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != 0) ++tp;
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(rank + 1);
    area += (recall - prev_recall) * 0.5 * (precision + prev_precision);
    prev_recall = recall;
    prev_precision = precision;
  }
  return area;
}

struct InterpretabilityReport {
  std::size_t num_groups = 0;
  double avg_rule_length = 0.0;
  double avg_impurity_fraction = 0.0;
  double avg_interval_width = 0.0;
};

inline InterpretabilityReport interpretability_report(std::span<const Pack> packing,
                                                      const LabeledDataset& data) {
  InterpretabilityReport r;
  if (packing.empty()) return r;
  r.num_groups = packing.size();
  double dims = 0.0;
  double impurity = 0.0;
  double width = 0.0;
  std::size_t rules = 0;
  for (const auto& p : packing) {
    dims += static_cast<double>(p.dimension());
    impurity += static_cast<double>(p.impurity());
    for (std::size_t z = 0; z < p.dimension(); ++z) {
      const double lb = std::clamp(p.shape.center[z] - p.shape.radii[z], 0.0, 1.0);
      const double ub = std::clamp(p.shape.center[z] + p.shape.radii[z], 0.0, 1.0);
      width += ub - lb;
      ++rules;
    }
  }
  const double k = static_cast<double>(packing.size());
  r.avg_rule_length = dims / k;
  r.avg_impurity_fraction = impurity / k / static_cast<double>(data.normal_count());
  r.avg_interval_width = rules == 0 ? 0.0 : width / static_cast<double>(rules);
  return r;
}

struct SynthConfig {
  std::size_t m = 2000;
  std::size_t d = 20;
  std::size_t num_packs = 3;
  std::size_t max_pack_dim = 3;
  double anomaly_fraction = 0.1;
  double range_width = 0.1;
  std::uint64_t seed = 0;
};

struct PlantedPack {
  std::vector<Side> sides;  // planted interval per pack feature
  IdList anomaly_ids;
};

struct SyntheticData {
  LabeledDataset dataset;
  std::vector<PlantedPack> planted;
};

inline constexpr std::size_t kSynthHistogramBins = 20;

// Anomalies are dealt round-robin to the planted packs and drawn uniformly
// inside their pack's intervals (uniform on [0,1] elsewhere). Normals draw
// each feature from the complement of the anomaly histogram, so planted
// regions are sparsely populated by normals.
inline SyntheticData generate_synthetic(const SynthConfig& cfg) {
  if (cfg.num_packs == 0) throw std::invalid_argument("num_packs must be at least 1");
  if (cfg.max_pack_dim == 0 || cfg.max_pack_dim > cfg.d)
    throw std::invalid_argument("max_pack_dim must be in [1, d]");
  if (!(cfg.range_width > 0.0 && cfg.range_width < 1.0))
    throw std::invalid_argument("range_width must lie in (0, 1)");
  if (!(cfg.anomaly_fraction > 0.0 && cfg.anomaly_fraction < 1.0))
    throw std::invalid_argument("anomaly_fraction must lie in (0, 1)");
  const auto a = static_cast<std::size_t>(std::llround(cfg.anomaly_fraction * static_cast<double>(cfg.m)));
  if (a == 0 || a >= cfg.m) throw std::invalid_argument("configuration yields no anomalies or no normals");
  const std::size_t n = cfg.m - a;
  const std::size_t d = cfg.d;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticData out;
  out.planted.resize(cfg.num_packs);
  std::vector<std::size_t> features(d);
  for (auto& pack : out.planted) {
    const std::size_t dim = 1 + static_cast<std::size_t>(rng() % cfg.max_pack_dim);
    std::iota(features.begin(), features.end(), 0);
    std::shuffle(features.begin(), features.end(), rng);
    std::vector<std::size_t> chosen(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(dim));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t f : chosen) {
      const double lb = unit(rng) * (1.0 - cfg.range_width);
      pack.sides.push_back({f, {lb, lb + cfg.range_width}});
    }
  }

  // Rows 0..a-1 are anomalies before shuffling.
  std::vector<double> rows(cfg.m * d);
  for (std::size_t i = 0; i < a; ++i) {
    const auto& pack = out.planted[i % cfg.num_packs];
    for (std::size_t f = 0; f < d; ++f) rows[i * d + f] = unit(rng);
    for (const auto& s : pack.sides)
      rows[i * d + s.feature] = s.interval.lb + unit(rng) * s.interval.width();
  }

  const double bin_width = 1.0 / static_cast<double>(kSynthHistogramBins);
  for (std::size_t f = 0; f < d; ++f) {
    std::vector<double> hist(kSynthHistogramBins, 0.0);
    for (std::size_t i = 0; i < a; ++i) {
      auto b = static_cast<std::size_t>(rows[i * d + f] / bin_width);
      hist[std::min(b, kSynthHistogramBins - 1)] += 1.0;
    }
    const double peak = *std::max_element(hist.begin(), hist.end());
    std::vector<double> weights(kSynthHistogramBins);
    for (std::size_t b = 0; b < kSynthHistogramBins; ++b) weights[b] = peak - hist[b] + 0.01 * peak;
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t b = pick(rng);
      rows[(a + j) * d + f] = (static_cast<double>(b) + unit(rng)) * bin_width;
    }
  }

  std::vector<std::size_t> order(cfg.m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> values(cfg.m * d);
  std::vector<Label> labels(cfg.m);
  for (std::size_t pos = 0; pos < cfg.m; ++pos) {
    const std::size_t src = order[pos];
    std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(src * d), d,
                values.begin() + static_cast<std::ptrdiff_t>(pos * d));
    labels[pos] = src < a ? Label::kAnomalous : Label::kNormal;
    if (src < a) out.planted[src % cfg.num_packs].anomaly_ids.push_back(pos);
  }
  for (auto& p : out.planted) std::sort(p.anomaly_ids.begin(), p.anomaly_ids.end());

  std::vector<std::string> names;
  for (std::size_t f = 0; f < d; ++f) names.push_back("f" + std::to_string(f));
  out.dataset = LabeledDataset(std::move(values), std::move(labels), std::move(names));
  return out;
}

}  // namespace anopack

#endif  // ANOPACK_EVALUATE_HPP_
