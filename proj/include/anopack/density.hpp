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

// One-dimensional Gaussian KDE over the anomalous values of each feature and
// extraction of high-density intervals used to seed the lattice search.

#ifndef ANOPACK_DENSITY_HPP_
#define ANOPACK_DENSITY_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "anopack/dataset.hpp"
#include "anopack/rectangle.hpp"

namespace anopack {

inline constexpr std::size_t kDensitySamples = 512;
inline constexpr double kSampleSpacing = 1.0 / static_cast<double>(kDensitySamples - 1);

struct DensityCurve {
  std::vector<double> xs;
  std::vector<double> densities;
  double bandwidth = 0.0;
};

namespace detail {

// Linear-interpolated quantile of sorted data, p in [0,1].
inline double sorted_quantile(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

// Silverman's rule of thumb: 0.9 * min(sd, IQR/1.34) * n^(-1/5), falling back
// to sd when the IQR collapses. Needs at least two distinct values.
inline double silverman_bandwidth(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() < 2 || sorted.front() == sorted.back())
    throw std::invalid_argument("bandwidth needs at least two distinct values");
  const double n = static_cast<double>(sorted.size());
  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = detail::sorted_quantile(sorted, 0.75) - detail::sorted_quantile(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

// Gaussian kernel density on 512 equally spaced points over [0,1]. No
// boundary correction.
inline DensityCurve estimate_density(std::span<const double> values, double bandwidth) {
  if (values.empty()) throw std::invalid_argument("density of an empty sample");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  DensityCurve curve;
  curve.bandwidth = bandwidth;
  curve.xs.resize(kDensitySamples);
  curve.densities.assign(kDensitySamples, 0.0);
  const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t s = 0; s < kDensitySamples; ++s) {
    const double x = static_cast<double>(s) * kSampleSpacing;
    curve.xs[s] = x;
    double acc = 0.0;
    for (double v : values) {
      const double z = (x - v) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    curve.densities[s] = acc * norm;
  }
  return curve;
}

// Nearest-rank percentile of the sampled densities.
inline double density_quantile(const DensityCurve& curve, double q) {
  std::vector<double> sorted = curve.densities;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

// Maximal runs of samples whose density strictly exceeds the q-th percentile.
// Single-sample runs are widened by one grid step on each side.
inline std::vector<Interval> extract_high_density_intervals(const DensityCurve& curve, double q) {
  const double threshold = density_quantile(curve, q);
  std::vector<Interval> out;
  const std::size_t n = curve.densities.size();
  std::size_t s = 0;
  while (s < n) {
    if (!(curve.densities[s] > threshold)) {
      ++s;
      continue;
    }
    std::size_t e = s;
    while (e + 1 < n && curve.densities[e + 1] > threshold) ++e;
    std::size_t lo = s;
    std::size_t hi = e;
    if (lo == hi) {
      lo = lo == 0 ? 0 : lo - 1;
      hi = std::min(hi + 1, n - 1);
    }
    out.push_back({curve.xs[lo], curve.xs[hi]});
    s = e + 1;
  }
  return out;
}

// Sorts 1-d rectangles canonically and drops repeated (feature, interval)
// pairs.
inline void deduplicate_seeds(std::vector<HyperRectangle>& seeds) {
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
}

// Level-1 rectangles from the high-density intervals of every usable feature
// at each quantile. Degenerate features and features with fewer than two
// distinct anomalous values are skipped.
inline std::vector<HyperRectangle> seed_rectangles(const LabeledDataset& data,
                                                   std::span<const double> quantiles) {
  if (quantiles.empty()) throw std::invalid_argument("no quantile thresholds given");
  std::vector<HyperRectangle> seeds;
  std::vector<double> values(data.anomaly_count());
  for (std::size_t f = 0; f < data.dims(); ++f) {
    if (data.degenerate(f)) continue;
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] = data.value(data.anomaly_ids()[i], f);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) continue;
    const DensityCurve curve = estimate_density(values, silverman_bandwidth(values));
    for (double q : quantiles) {
      for (const Interval& iv : extract_high_density_intervals(curve, q))
        seeds.push_back(HyperRectangle{{Side{f, iv}}, 0, 0});
    }
  }
  deduplicate_seeds(seeds);
  for (auto& r : seeds) evaluate(r, data);
  return seeds;
}

}  // namespace anopack

#endif  // ANOPACK_DENSITY_HPP_
