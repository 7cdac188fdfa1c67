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

#ifndef ANOPACK_RECTANGLE_HPP_
#define ANOPACK_RECTANGLE_HPP_

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "anopack/common.hpp"
#include "anopack/dataset.hpp"

namespace anopack {

// Closed interval [lb, ub] inside the normalized feature range.
struct Interval {
  double lb = 0.0;
  double ub = 0.0;

  double width() const { return ub - lb; }
  bool contains(double x) const { return lb <= x && x <= ub; }
  bool contains(const Interval& other) const {
    return lb <= other.lb && other.ub <= ub;
  }
  auto operator<=>(const Interval&) const = default;
};

struct Side {
  std::size_t feature = 0;
  Interval interval;
  auto operator<=>(const Side&) const = default;
};

// Axis-aligned box over a feature subspace. Sides are kept in strictly
// increasing feature order; mass/impurity are cached counts of enclosed
// anomalies/normals and are only meaningful after evaluation.
struct HyperRectangle {
  std::vector<Side> sides;
  std::size_t mass = 0;
  std::size_t impurity = 0;

  std::size_t level() const { return sides.size(); }

  bool canonical() const {
    if (sides.empty()) return false;
    for (std::size_t i = 1; i < sides.size(); ++i)
      if (sides[i - 1].feature >= sides[i].feature) return false;
    return true;
  }

  // Bounds are inclusive on both ends.
  bool contains(std::span<const double> point) const {
    for (const auto& s : sides)
      if (!s.interval.contains(point[s.feature])) return false;
    return true;
  }

  std::vector<std::size_t> features() const {
    std::vector<std::size_t> out;
    out.reserve(sides.size());
    for (const auto& s : sides) out.push_back(s.feature);
    return out;
  }

  // Identity is the side list alone; cached counts do not participate.
  friend bool operator==(const HyperRectangle& a, const HyperRectangle& b) {
    return a.sides == b.sides;
  }
  friend bool operator<(const HyperRectangle& a, const HyperRectangle& b) {
    return a.sides < b.sides;
  }
};

struct Enclosure {
  std::size_t mass = 0;
  std::size_t impurity = 0;
  IdList anomaly_ids;
  IdList normal_ids;
};

inline Enclosure mass_and_impurity(const HyperRectangle& rect, const LabeledDataset& data) {
  Enclosure out;
  for (PointId i = 0; i < data.size(); ++i) {
    if (!rect.contains(data.point(i))) continue;
    (data.is_anomaly(i) ? out.anomaly_ids : out.normal_ids).push_back(i);
  }
  out.mass = out.anomaly_ids.size();
  out.impurity = out.normal_ids.size();
  return out;
}

// Recomputes and stores the cached counts.
inline void evaluate(HyperRectangle& rect, const LabeledDataset& data) {
  rect.mass = 0;
  rect.impurity = 0;
  for (PointId i = 0; i < data.size(); ++i) {
    if (!rect.contains(data.point(i))) continue;
    ++(data.is_anomaly(i) ? rect.mass : rect.impurity);
  }
}

}  // namespace anopack

#endif  // ANOPACK_RECTANGLE_HPP_
