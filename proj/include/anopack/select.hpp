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

// Pack selection: cardinality-constrained Random-Greedy over the
// description-length reduction, swept over the number of packs K.

#ifndef ANOPACK_SELECT_HPP_
#define ANOPACK_SELECT_HPP_

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "anopack/common.hpp"
#include "anopack/dataset.hpp"
#include "anopack/mdl.hpp"
#include "anopack/refine.hpp"

namespace anopack {

inline constexpr std::size_t kDefaultKCap = 25;
inline constexpr std::size_t kBruteForceLimit = 20;

// Index-based view of a candidate pool: per-pack anomaly coverage bitsets
// and constant pack costs. Only the coverage union varies with the subset.
class CoverageModel {
 public:
  CoverageModel(std::span<const Pack> pool, const LabeledDataset& data,
                const EncodingParams& params)
      : unit_cost_(params.unit_cost()), pool_cost_(params.candidate_pool_cost) {
    std::unordered_map<PointId, std::size_t> slot;
    for (std::size_t i = 0; i < data.anomaly_ids().size(); ++i) slot[data.anomaly_ids()[i]] = i;
    universe_ = data.anomaly_count();
    for (const auto& p : pool) {
      DynamicBitset bits(universe_);
      for (PointId id : p.covered_anomalies) {
        auto it = slot.find(id);
        if (it == slot.end()) throw std::invalid_argument("pack covers a non-anomalous point");
        bits.set(it->second);
      }
      cover_.push_back(std::move(bits));
      cost_.push_back(pack_cost(p, params));
    }
  }

  // Direct construction from coverage sets over a universe of anomalies.
  CoverageModel(std::size_t universe, std::vector<std::vector<std::size_t>> covers,
                std::vector<double> costs, double unit_cost, double pool_cost)
      : universe_(universe), unit_cost_(unit_cost), pool_cost_(pool_cost), cost_(std::move(costs)) {
    for (const auto& c : covers) {
      DynamicBitset bits(universe);
      for (std::size_t i : c) bits.set(i);
      cover_.push_back(std::move(bits));
    }
  }

  std::size_t size() const { return cover_.size(); }
  std::size_t universe() const { return universe_; }
  double unit_cost() const { return unit_cost_; }
  double pool_cost() const { return pool_cost_; }
  double cost(std::size_t i) const { return cost_[i]; }
  const DynamicBitset& cover(std::size_t i) const { return cover_[i]; }

  DynamicBitset union_of(std::span<const std::size_t> subset) const {
    DynamicBitset u(universe_);
    for (std::size_t i : subset) {
      if (i >= size()) throw std::out_of_range("subset index outside the candidate pool");
      u |= cover_[i];
    }
    return u;
  }

  // Marginal change of the cardinality-fixed objective when adding i.
  double gain(const DynamicBitset& covered, std::size_t i) const {
    return static_cast<double>(cover_[i].count_and_not(covered)) * unit_cost_ - cost_[i];
  }

  // R'(S): coverage reward minus pack costs plus the pool constant.
  double fixed_objective(std::span<const std::size_t> subset) const {
    double total = static_cast<double>(union_of(subset).count()) * unit_cost_ + pool_cost_;
    for (std::size_t i : subset) total -= cost_[i];
    return total;
  }

  // R(S) = R'(S) - log*|S|.
  double objective(std::span<const std::size_t> subset) const {
    return fixed_objective(subset) - log_star(subset.size());
  }

 private:
  std::size_t universe_ = 0;
  double unit_cost_ = 0.0;
  double pool_cost_ = 0.0;
  std::vector<DynamicBitset> cover_;
  std::vector<double> cost_;
};

// K rounds; each ranks the unselected packs by marginal gain (ties by
// index), draws uniformly among the top K, and adds the draw when its gain
// is positive. A non-positive draw plays the role of a dummy element and
// consumes the round, so the result may hold fewer than K packs.
inline std::vector<std::size_t> random_greedy(const CoverageModel& model, std::size_t k,
                                              std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("random greedy needs K >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(model.size(), false);
  DynamicBitset covered(model.universe());
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t round = 0; round < k; ++round) {
    ranked.clear();
    for (std::size_t i = 0; i < model.size(); ++i)
      if (!taken[i]) ranked.emplace_back(model.gain(covered, i), i);
    if (ranked.empty()) break;
    const std::size_t top = std::min(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top),
                      ranked.end(), [](const auto& a, const auto& b) {
                        return a.first > b.first || (a.first == b.first && a.second < b.second);
                      });
    const auto& pick = ranked[static_cast<std::size_t>(rng() % top)];
    if (pick.first <= 0.0) continue;
    taken[pick.second] = true;
    covered |= model.cover(pick.second);
    chosen.push_back(pick.second);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// Exhaustive maximization of R' over all subsets of size <= K.
inline std::vector<std::size_t> brute_force_select(const CoverageModel& model, std::size_t k) {
  if (model.size() > kBruteForceLimit) throw std::invalid_argument("pool too large for brute force");
  const std::size_t n = model.size();
  std::vector<std::size_t> best;
  double best_value = model.fixed_objective(best);
  std::vector<std::size_t> subset;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > k) continue;
    subset.clear();
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1U) subset.push_back(i);
    const double v = model.fixed_objective(subset);
    if (v > best_value) {
      best_value = v;
      best = subset;
    }
  }
  return best;
}

// Deterministic greedy by bits per newly covered anomaly: repeatedly adds
// the pack with the smallest cost per fresh anomaly among those that raise
// R, until none does. Ties go to the smaller index.
inline std::vector<std::size_t> cost_effective_greedy(const CoverageModel& model) {
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(model.size(), false);
  DynamicBitset covered(model.universe());
  for (;;) {
    const double count_delta = log_star(chosen.size() + 1) - log_star(chosen.size());
    std::size_t best = model.size();
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
      if (taken[i]) continue;
      const std::size_t fresh = model.cover(i).count_and_not(covered);
      if (fresh == 0 || model.gain(covered, i) - count_delta <= 0.0) continue;
      const double ratio = model.cost(i) / static_cast<double>(fresh);
      if (best == model.size() || ratio < best_ratio) {
        best = i;
        best_ratio = ratio;
      }
    }
    if (best == model.size()) break;
    taken[best] = true;
    covered |= model.cover(best);
    chosen.push_back(best);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// Best-improvement local search on R over four move types: add one pack,
// drop one, swap one for one, and replace two by one. Stops when no move
// raises R by more than a relative 1e-12; ties keep the first move found.
inline std::vector<std::size_t> improve_locally(const CoverageModel& model,
                                                std::vector<std::size_t> subset,
                                                std::size_t max_rounds = 1000) {
  std::vector<bool> in(model.size(), false);
  for (std::size_t i : subset) in[i] = true;
  double value = model.objective(subset);
  for (std::size_t round = 0; round < max_rounds; ++round) {
    const std::size_t n = subset.size();
    double base_cost = 0.0;
    for (std::size_t i : subset) base_cost += model.cost(i);
    auto score = [&](std::size_t covered, double cost, std::size_t size) {
      return static_cast<double>(covered) * model.unit_cost() - cost + model.pool_cost() -
             log_star(size);
    };
    double best_value = value + 1e-12 * std::max(1.0, std::abs(value));
    std::vector<std::size_t> best_remove;
    std::size_t best_add = model.size();
    bool found = false;

    auto consider_adds = [&](const DynamicBitset& base, double cost, std::size_t size,
                             const std::vector<std::size_t>& removed, bool allow_none) {
      const std::size_t covered = base.count();
      if (allow_none) {
        const double v = score(covered, cost, size);
        if (v > best_value) {
          best_value = v, best_remove = removed, best_add = model.size(), found = true;
        }
      }
      for (std::size_t i = 0; i < model.size(); ++i) {
        if (in[i]) continue;
        const double v = score(covered + model.cover(i).count_and_not(base),
                               cost + model.cost(i), size + 1);
        if (v > best_value) best_value = v, best_remove = removed, best_add = i, found = true;
      }
    };

    consider_adds(model.union_of(subset), base_cost, n, {}, false);
    std::vector<std::size_t> rest;
    for (std::size_t a = 0; a < n; ++a) {
      rest.clear();
      for (std::size_t c = 0; c < n; ++c)
        if (c != a) rest.push_back(subset[c]);
      consider_adds(model.union_of(rest), base_cost - model.cost(subset[a]), n - 1,
                    {subset[a]}, true);
      for (std::size_t b = a + 1; b < n; ++b) {
        rest.clear();
        for (std::size_t c = 0; c < n; ++c)
          if (c != a && c != b) rest.push_back(subset[c]);
        const double cost = base_cost - model.cost(subset[a]) - model.cost(subset[b]);
        const DynamicBitset base = model.union_of(rest);
        const std::size_t covered = base.count();
        for (std::size_t i = 0; i < model.size(); ++i) {
          if (in[i]) continue;
          const double v = score(covered + model.cover(i).count_and_not(base),
                                 cost + model.cost(i), n - 1);
          if (v > best_value) {
            best_value = v, best_remove = {subset[a], subset[b]}, best_add = i, found = true;
          }
        }
      }
    }
    if (!found) break;
    for (std::size_t r : best_remove) {
      in[r] = false;
      subset.erase(std::find(subset.begin(), subset.end(), r));
    }
    if (best_add < model.size()) {
      in[best_add] = true;
      subset.push_back(best_add);
    }
    value = model.objective(subset);
  }
  std::sort(subset.begin(), subset.end());
  return subset;
}

enum class SelectionStrategy {
  kRandomGreedy,  // the K sweep alone
  kCombined,      // local search from every sweep solution and the cost-effective greedy
};

struct TracePoint {
  std::size_t k = 0;
  double bits = 0.0;  // R of the K-th greedy solution
};

struct SelectionResult {
  std::size_t best_k = 0;               // size of the returned packing
  std::vector<std::size_t> pack_indices;  // into the pool, ascending
  double objective_value = 0.0;
  std::vector<TracePoint> trace;
  std::uint64_t seed = 0;
  bool k_cap_hit = false;
  bool cost_effective_won = false;  // the winning start was the cost-effective greedy
};

// Runs Random-Greedy for K = 1..min(a, |pool|, k_cap) with seed + K and
// returns the solution with the largest R (K = 0, the empty packing, is
// always a candidate). Ties go to the smaller K. Under kCombined the result
// is replaced by the best locally improved candidate when that is strictly
// better.
inline SelectionResult select_packing(const CoverageModel& model, std::size_t anomaly_count,
                                      std::uint64_t seed, std::size_t k_cap = kDefaultKCap,
                                      std::size_t workers = 1,
                                      SelectionStrategy strategy = SelectionStrategy::kCombined) {
  SelectionResult result;
  result.seed = seed;
  const std::size_t uncapped = std::min(anomaly_count, model.size());
  const std::size_t k_max = std::min(uncapped, k_cap);
  result.k_cap_hit = uncapped > k_cap;

  std::vector<std::vector<std::size_t>> solutions(k_max + 1);
  std::vector<double> values(k_max + 1);
  values[0] = model.objective(solutions[0]);
  parallel_for(k_max, workers, [&](std::size_t i) {
    const std::size_t k = i + 1;
    solutions[k] = random_greedy(model, k, seed + k);
    values[k] = model.objective(solutions[k]);
  });

  std::size_t best = 0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    result.trace.push_back({k, values[k]});
    if (values[k] > values[best]) best = k;
  }
  result.pack_indices = solutions[best];
  result.best_k = result.pack_indices.size();
  result.objective_value = values[best];
  if (strategy == SelectionStrategy::kCombined) {
    // Every sweep solution and the cost-effective greedy solution seed a
    // local search; the best improved packing wins, ties to the earliest start.
    std::vector<std::vector<std::size_t>> starts(solutions.begin(), solutions.end());
    starts.push_back(cost_effective_greedy(model));
    std::vector<std::vector<std::size_t>> improved(starts.size());
    std::vector<double> improved_values(starts.size());
    parallel_for(starts.size(), workers, [&](std::size_t i) {
      improved[i] = improve_locally(model, starts[i]);
      improved_values[i] = model.objective(improved[i]);
    });
    std::size_t winner = 0;
    for (std::size_t i = 1; i < starts.size(); ++i)
      if (improved_values[i] > improved_values[winner]) winner = i;
    if (improved_values[winner] > result.objective_value) {
      result.pack_indices = std::move(improved[winner]);
      result.best_k = result.pack_indices.size();
      result.objective_value = improved_values[winner];
      result.cost_effective_won = winner + 1 == starts.size();
    }
  }
  return result;
}

}  // namespace anopack

#endif  // ANOPACK_SELECT_HPP_
