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

// Description-length accounting for packings. All costs are real-valued bit
// counts; nothing is ever encoded into an actual stream.
//
// A pack costs
//   log*(d_k) + log2 C(d, d_k) + shape bits + log*(n_k) + log2 C(m_k, n_k)
// where the shape bits are 2 d_k log2 f for axis-aligned packs (center plus
// diagonal) and m_k = |A_k| + |N_k|, n_k = |N_k| identify the exceptions.
// Anomalies left outside every pack cost d log2 f bits each.

#ifndef ANOPACK_MDL_HPP_
#define ANOPACK_MDL_HPP_

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numbers>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "anopack/common.hpp"
#include "anopack/dataset.hpp"
#include "anopack/refine.hpp"

namespace anopack {

inline constexpr double kDefaultLog2F = 10.0;

// Sum of the positive terms of log2(k) + log2(log2(k)) + ...; zero for k <= 1.
inline double log_star(std::size_t k) {
  double total = 0.0;
  double term = static_cast<double>(k);
  for (;;) {
    term = std::log2(term);
    if (!(term > 0.0)) break;
    total += term;
  }
  return total;
}

inline double log2_binomial(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("binomial with k > n");
  if (k == 0 || k == n) return 0.0;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return (std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0)) /
         std::numbers::ln2;
}

struct EncodingParams {
  std::size_t d = 0;
  std::size_t m = 0;
  std::size_t a = 0;
  double log2_f = kDefaultLog2F;
  bool full_shape_cost = false;   // price d_k^2 shape entries instead of d_k
  double candidate_pool_cost = 0.0;

  double unit_cost() const { return static_cast<double>(d) * log2_f; }
  double naive_bits() const { return static_cast<double>(a) * unit_cost(); }
};

struct PackShape {
  std::size_t dims = 0;        // d_k
  std::size_t points = 0;      // m_k
  std::size_t exceptions = 0;  // n_k
};

inline PackShape shape_of(const Pack& pack) {
  return {pack.dimension(), pack.mass() + pack.impurity(), pack.impurity()};
}

inline double pack_cost(const PackShape& s, const EncodingParams& params) {
  if (s.dims > params.d) throw std::invalid_argument("pack dimension exceeds ambient dimension");
  if (s.exceptions > s.points) throw std::invalid_argument("more exceptions than enclosed points");
  const double dk = static_cast<double>(s.dims);
  const double shape_bits = params.full_shape_cost ? dk * (dk + 1.0) * params.log2_f
                                                   : 2.0 * dk * params.log2_f;
  return log_star(s.dims) + log2_binomial(params.d, s.dims) + shape_bits +
         log_star(s.exceptions) + log2_binomial(s.points, s.exceptions);
}

inline double pack_cost(const Pack& pack, const EncodingParams& params) {
  return pack_cost(shape_of(pack), params);
}

// log*(K) + sum of pack costs.
inline double packing_cost(std::span<const Pack> packing, const EncodingParams& params) {
  double total = log_star(packing.size());
  for (const auto& p : packing) total += pack_cost(p, params);
  return total;
}

// Constant term log*|E| + sum over the pool; makes the reduction
// objective non-negative.
inline double candidate_pool_cost(std::span<const Pack> pool, const EncodingParams& params) {
  return packing_cost(pool, params);
}

inline EncodingParams make_encoding(const LabeledDataset& data, std::span<const Pack> pool,
                                    double log2_f = kDefaultLog2F, bool full_shape_cost = false) {
  if (!(log2_f > 0.0)) throw std::invalid_argument("log2_f must be positive");
  EncodingParams params;
  params.d = data.dims();
  params.m = data.size();
  params.a = data.anomaly_count();
  params.log2_f = log2_f;
  params.full_shape_cost = full_shape_cost;
  params.candidate_pool_cost = candidate_pool_cost(pool, params);
  return params;
}

inline IdList covered_union(std::span<const Pack> packing) {
  IdList out;
  for (const auto& p : packing) out.insert(out.end(), p.covered_anomalies.begin(), p.covered_anomalies.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct PackingCostReport {
  std::size_t num_packs = 0;
  std::vector<double> per_pack_bits;
  IdList outlier_ids;
  double total_bits = 0.0;
  double naive_bits = 0.0;
  double savings_percent = 0.0;
};

// L(A | D, P) = (a - |union A_p|) d log2 f + packing cost.
inline PackingCostReport description_length(std::span<const Pack> packing,
                                            const LabeledDataset& data,
                                            const EncodingParams& params) {
  PackingCostReport report;
  report.num_packs = packing.size();
  for (const auto& p : packing) report.per_pack_bits.push_back(pack_cost(p, params));
  const IdList covered = covered_union(packing);
  std::set_difference(data.anomaly_ids().begin(), data.anomaly_ids().end(), covered.begin(),
                      covered.end(), std::back_inserter(report.outlier_ids));
  report.total_bits = static_cast<double>(report.outlier_ids.size()) * params.unit_cost() +
                      packing_cost(packing, params);
  report.naive_bits = params.naive_bits();
  report.savings_percent =
      report.naive_bits > 0.0 ? 100.0 * (1.0 - report.total_bits / report.naive_bits) : 0.0;
  return report;
}

// R(S) = |union A_p| c_u - log*|S| - sum L(p) + candidate_pool_cost.
inline double reduction_objective(std::span<const Pack> subset, const EncodingParams& params) {
  const double cover = static_cast<double>(covered_union(subset).size());
  return cover * params.unit_cost() - packing_cost(subset, params) + params.candidate_pool_cost;
}

// The cardinality-fixed variant: R(S) without the log*|S| term.
inline double reduction_objective_fixed(std::span<const Pack> subset,
                                        const EncodingParams& params) {
  return reduction_objective(subset, params) + log_star(subset.size());
}

}  // namespace anopack

#endif  // ANOPACK_MDL_HPP_
