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

// Bottom-up Apriori search over hyper-rectangles. Rectangles meeting the
// mass threshold are joined level by level; those that are also pure are
// reported.

#ifndef ANOPACK_LATTICE_HPP_
#define ANOPACK_LATTICE_HPP_

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "anopack/common.hpp"
#include "anopack/dataset.hpp"
#include "anopack/rectangle.hpp"

namespace anopack {

inline constexpr std::size_t kDefaultLevelCap = 6;

struct Thresholds {
  std::size_t ms = 2;  // minimum enclosed anomalies
  std::size_t mu = 0;  // maximum enclosed normals
};

namespace detail {

struct Candidate {
  HyperRectangle rect;
  std::size_t left = 0;   // index of the joined parents in the sorted level
  std::size_t right = 0;
};

// Join on a shared (k-1)-side prefix, then drop candidates with a k-side
// projection missing from `level`. `level` must be sorted and unique.
inline std::vector<Candidate> join_and_prune(const std::vector<HyperRectangle>& level) {
  std::vector<Candidate> out;
  if (level.empty()) return out;
  const std::size_t k = level.front().level();
  for (const auto& r : level)
    if (r.level() != k) throw std::invalid_argument("candidate generation over mixed levels");

  auto same_prefix = [k](const HyperRectangle& a, const HyperRectangle& b) {
    return std::equal(a.sides.begin(), a.sides.begin() + static_cast<std::ptrdiff_t>(k - 1),
                      b.sides.begin());
  };
  auto present = [&level](const std::vector<Side>& sides) {
    HyperRectangle probe{sides, 0, 0};
    return std::binary_search(level.begin(), level.end(), probe);
  };

  std::size_t group_start = 0;
  while (group_start < level.size()) {
    std::size_t group_end = group_start + 1;
    while (group_end < level.size() && same_prefix(level[group_start], level[group_end]))
      ++group_end;
    for (std::size_t i = group_start; i < group_end; ++i) {
      for (std::size_t j = i + 1; j < group_end; ++j) {
        const Side& last_u = level[i].sides.back();
        const Side& last_v = level[j].sides.back();
        if (!(last_u.feature < last_v.feature)) continue;
        HyperRectangle cand;
        cand.sides = level[i].sides;
        cand.sides.push_back(last_v);
        bool keep = true;
        // Dropping either of the last two sides yields the parents.
        for (std::size_t drop = 0; keep && drop + 2 < cand.sides.size(); ++drop) {
          std::vector<Side> proj;
          proj.reserve(k);
          for (std::size_t s = 0; s < cand.sides.size(); ++s)
            if (s != drop) proj.push_back(cand.sides[s]);
          keep = present(proj);
        }
        if (keep) out.push_back({std::move(cand), i, j});
      }
    }
    group_start = group_end;
  }
  return out;
}

inline DynamicBitset enclosed_bits(const HyperRectangle& rect, const LabeledDataset& data) {
  DynamicBitset bits(data.size());
  for (PointId i = 0; i < data.size(); ++i)
    if (rect.contains(data.point(i))) bits.set(i);
  return bits;
}

}  // namespace detail

// Level k+1 candidates from level-k rectangles. Counts are left at zero; the
// output is sorted and free of duplicates.
inline std::vector<HyperRectangle> generate_candidates(std::vector<HyperRectangle> level) {
  std::sort(level.begin(), level.end());
  level.erase(std::unique(level.begin(), level.end()), level.end());
  std::vector<HyperRectangle> out;
  for (auto& c : detail::join_and_prune(level)) out.push_back(std::move(c.rect));
  std::sort(out.begin(), out.end());
  return out;
}

struct SubclusResult {
  std::vector<HyperRectangle> rectangles;           // mass >= ms and impurity <= mu
  std::vector<std::vector<HyperRectangle>> levels;  // all evaluated candidates, per level
  bool level_cap_hit = false;
};

// Apriori search from level-1 seeds. Both pure and impure rectangles that
// meet the mass threshold feed the next level; only pure ones are reported.
inline SubclusResult subclus(const LabeledDataset& data, std::vector<HyperRectangle> seeds,
                             const Thresholds& th, std::size_t level_cap = kDefaultLevelCap) {
  SubclusResult result;
  if (seeds.empty()) return result;

  DynamicBitset anomaly_mask(data.size());
  for (PointId id : data.anomaly_ids()) anomaly_mask.set(id);

  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  std::vector<HyperRectangle> level = std::move(seeds);
  std::vector<DynamicBitset> bits;
  bits.reserve(level.size());
  for (auto& r : level) {
    bits.push_back(detail::enclosed_bits(r, data));
    r.mass = bits.back().count_and(anomaly_mask);
    r.impurity = bits.back().count() - r.mass;
  }

  for (std::size_t depth = 1;; ++depth) {
    result.levels.push_back(level);
    std::vector<HyperRectangle> survivors;
    std::vector<DynamicBitset> survivor_bits;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (level[i].mass < th.ms) continue;
      if (level[i].impurity <= th.mu) result.rectangles.push_back(level[i]);
      survivors.push_back(std::move(level[i]));
      survivor_bits.push_back(std::move(bits[i]));
    }
    if (survivors.empty()) break;

    auto candidates = detail::join_and_prune(survivors);
    if (candidates.empty()) break;
    if (depth >= level_cap) {
      result.level_cap_hit = true;
      break;
    }
    level.clear();
    bits.clear();
    level.reserve(candidates.size());
    bits.reserve(candidates.size());
    for (auto& c : candidates) {
      DynamicBitset b = survivor_bits[c.left] & survivor_bits[c.right];
      c.rect.mass = b.count_and(anomaly_mask);
      c.rect.impurity = b.count() - c.rect.mass;
      level.push_back(std::move(c.rect));
      bits.push_back(std::move(b));
    }
    // join_and_prune emits in sorted order already; keep bits aligned.
  }
  return result;
}

// Lower medians of the seed masses and impurities; ms is floored at 2.
inline Thresholds default_thresholds(const std::vector<HyperRectangle>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("thresholds need at least one seed");
  std::vector<std::size_t> masses;
  std::vector<std::size_t> impurities;
  for (const auto& s : seeds) {
    masses.push_back(s.mass);
    impurities.push_back(s.impurity);
  }
  auto lower_median = [](std::vector<std::size_t>& v) {
    const std::size_t mid = (v.size() - 1) / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    return v[mid];
  };
  Thresholds th;
  th.ms = std::max<std::size_t>(2, lower_median(masses));
  th.mu = lower_median(impurities);
  return th;
}

}  // namespace anopack

#endif  // ANOPACK_LATTICE_HPP_
