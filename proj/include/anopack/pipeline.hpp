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

// End-to-end explanation: density seeding, lattice search, refinement into
// packs and description-length driven selection.

#ifndef ANOPACK_PIPELINE_HPP_
#define ANOPACK_PIPELINE_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "anopack/common.hpp"
#include "anopack/dataset.hpp"
#include "anopack/density.hpp"
#include "anopack/lattice.hpp"
#include "anopack/mdl.hpp"
#include "anopack/refine.hpp"
#include "anopack/select.hpp"

namespace anopack {

struct PipelineConfig {
  std::vector<double> quantiles{80.0, 85.0, 90.0, 95.0};
  std::optional<std::size_t> ms;  // defaults to the median seed mass
  std::optional<std::size_t> mu;  // defaults to the median seed impurity
  std::vector<double> alphas = default_alpha_grid();
  std::vector<double> lambdas = default_lambda_grid();
  double log2_f = kDefaultLog2F;
  bool full_shape_cost = false;
  double margin = kDefaultVicinityMargin;
  std::size_t level_cap = kDefaultLevelCap;
  std::size_t k_cap = kDefaultKCap;
  std::uint64_t seed = 42;
  std::size_t workers = default_worker_count();
  FitMethod fit_method = FitMethod::kSimplex;
  SelectionStrategy selection = SelectionStrategy::kCombined;

  void validate() const {
    if (quantiles.empty() || alphas.empty() || lambdas.empty())
      throw InputError("quantile, alpha and lambda grids must be non-empty");
    for (double q : quantiles)
      if (!(q > 0.0 && q < 100.0)) throw InputError("quantiles must lie in (0, 100)");
    for (double a : alphas)
      if (!(a > 0.0)) throw InputError("alpha values must be positive");
    for (double l : lambdas)
      if (!(l > 0.0)) throw InputError("lambda values must be positive");
    if (!(log2_f > 0.0)) throw InputError("log2_f must be positive");
    if (margin < 0.0) throw InputError("vicinity margin must be non-negative");
    if (level_cap == 0) throw InputError("level cap must be at least 1");
    if (ms && *ms == 0) throw InputError("ms must be at least 1");
  }
};

struct StageTimes {
  double density = 0.0;
  double lattice = 0.0;
  double refine = 0.0;
  double select = 0.0;
};

struct ExplainResult {
  std::vector<HyperRectangle> seeds;
  Thresholds thresholds;
  SubclusResult lattice;
  std::vector<Pack> pool;
  RefineStats refine_stats;
  EncodingParams encoding;
  SelectionResult selection;
  std::vector<Pack> packing;
  PackingCostReport cost;
  StageTimes times;
};

// `data` must be normalized.
inline ExplainResult run_explain(const LabeledDataset& data, const PipelineConfig& config) {
  config.validate();
  if (!data.is_normalized()) throw InputError("explain expects a normalized dataset");
  using Clock = std::chrono::steady_clock;
  auto seconds = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  ExplainResult out;

  auto t0 = Clock::now();
  out.seeds = seed_rectangles(data, config.quantiles);
  auto t1 = Clock::now();
  out.times.density = seconds(t0, t1);

  if (!out.seeds.empty()) {
    const Thresholds medians = default_thresholds(out.seeds);
    out.thresholds.ms = config.ms.value_or(medians.ms);
    out.thresholds.mu = config.mu.value_or(medians.mu);
    out.lattice = subclus(data, out.seeds, out.thresholds, config.level_cap);
  }
  auto t2 = Clock::now();
  out.times.lattice = seconds(t1, t2);

  RefineOptions refine_options;
  refine_options.alphas = config.alphas;
  refine_options.lambdas = config.lambdas;
  refine_options.margin = config.margin;
  refine_options.fit.method = config.fit_method;
  const auto& rects = out.lattice.rectangles;
  std::vector<std::vector<Pack>> per_rect(rects.size());
  std::vector<RefineStats> stats(rects.size());
  parallel_for(rects.size(), config.workers, [&](std::size_t i) {
    per_rect[i] = refine_rectangle(rects[i], data, refine_options, i, &stats[i]);
  });
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (auto& p : per_rect[i]) out.pool.push_back(std::move(p));
    out.refine_stats.cells += stats[i].cells;
    out.refine_stats.solver_failures += stats[i].solver_failures;
    out.refine_stats.empty_ellipsoids += stats[i].empty_ellipsoids;
    out.refine_stats.coefficient_bound_hits += stats[i].coefficient_bound_hits;
  }
  auto t3 = Clock::now();
  out.times.refine = seconds(t2, t3);

  out.encoding = make_encoding(data, out.pool, config.log2_f, config.full_shape_cost);
  const CoverageModel model(out.pool, data, out.encoding);
  out.selection = select_packing(model, data.anomaly_count(), config.seed, config.k_cap,
                                 config.workers, config.selection);
  for (std::size_t i : out.selection.pack_indices) out.packing.push_back(out.pool[i]);
  out.cost = description_length(out.packing, data, out.encoding);
  out.times.select = seconds(t3, Clock::now());
  return out;
}

}  // namespace anopack

#endif  // ANOPACK_PIPELINE_HPP_
