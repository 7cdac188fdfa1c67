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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "anopack/density.hpp"
#include "test_support.hpp"

namespace anopack {
namespace {

TEST(SilvermanBandwidth, UnitSpreadThirtyTwoValues) {
  // Two clusters of 16: the IQR term exceeds the standard deviation, so the
  // rule reduces to 0.9 * sd * 32^-0.2 and sd is scaled to exactly 1.
  std::vector<double> values;
  for (int i = 0; i < 16; ++i) values.push_back(-1.0);
  for (int i = 0; i < 16; ++i) values.push_back(1.0);
  const double sd = std::sqrt(32.0 / 31.0);
  for (double& v : values) v /= sd;
  EXPECT_NEAR(silverman_bandwidth(values), 0.4501, 1e-4);
}

TEST(SilvermanBandwidth, IqrBranch) {
  // Heavy tails: IQR/1.34 is the smaller spread measure.
  std::vector<double> values = {-100.0, -0.5, -0.25, 0.0, 0.25, 0.5, 100.0};
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  // Linear-interpolated quartiles at positions 1.5 and 4.5.
  const double iqr = (0.25 + 0.5) / 2.0 - (-0.5 - 0.25) / 2.0;
  const double expected = 0.9 * (iqr / 1.34) * std::pow(7.0, -0.2);
  EXPECT_NEAR(silverman_bandwidth(values), expected, 1e-12);
}

TEST(SilvermanBandwidth, ZeroIqrFallsBackToSd) {
  std::vector<double> values = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  const double mean = 1.0 / 7.0;
  const double sd = std::sqrt((6.0 * mean * mean + (1.0 - mean) * (1.0 - mean)) / 6.0);
  EXPECT_NEAR(silverman_bandwidth(values), 0.9 * sd * std::pow(7.0, -0.2), 1e-12);
}

TEST(SilvermanBandwidth, ErrorsAndHomogeneity) {
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{0.3, 0.3, 0.3}), std::invalid_argument);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{0.3}), std::invalid_argument);
  std::vector<double> values = {0.1, 0.15, 0.3, 0.31, 0.5, 0.72, 0.9};
  std::vector<double> doubled = values;
  for (double& v : doubled) v *= 2.0;
  EXPECT_NEAR(silverman_bandwidth(doubled), 2.0 * silverman_bandwidth(values), 1e-12);
}

TEST(EstimateDensity, GridAndSingleBump) {
  const auto curve = estimate_density(std::vector<double>{0.5}, 0.05);
  ASSERT_EQ(curve.xs.size(), 512u);
  ASSERT_EQ(curve.densities.size(), 512u);
  EXPECT_DOUBLE_EQ(curve.xs.front(), 0.0);
  EXPECT_DOUBLE_EQ(curve.xs.back(), 1.0);
  for (std::size_t i = 1; i < curve.xs.size(); ++i) EXPECT_LT(curve.xs[i - 1], curve.xs[i]);
  const auto peak = std::max_element(curve.densities.begin(), curve.densities.end());
  const double x_peak = curve.xs[static_cast<std::size_t>(peak - curve.densities.begin())];
  EXPECT_LE(std::abs(x_peak - 0.5), kSampleSpacing);
  for (double v : curve.densities) EXPECT_GE(v, 0.0);
  // Strictly unimodal around the peak.
  for (auto it = curve.densities.begin(); it + 1 <= peak; ++it) EXPECT_LE(*it, *(it + 1));
  for (auto it = peak; it + 1 != curve.densities.end(); ++it) EXPECT_GE(*it, *(it + 1));
}

std::size_t local_maxima(const DensityCurve& curve, std::vector<double>* where) {
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < curve.densities.size(); ++i) {
    if (curve.densities[i] > curve.densities[i - 1] && curve.densities[i] >= curve.densities[i + 1]) {
      ++count;
      if (where) where->push_back(curve.xs[i]);
    }
  }
  return count;
}

TEST(EstimateDensity, TwoSymmetricBumps) {
  const auto curve = estimate_density(std::vector<double>{0.2, 0.8}, 0.03);
  std::vector<double> peaks;
  ASSERT_EQ(local_maxima(curve, &peaks), 2u);
  EXPECT_NEAR(peaks[0], 0.2, kSampleSpacing);
  EXPECT_NEAR(peaks[1], 0.8, kSampleSpacing);
}

TEST(EstimateDensity, TrapezoidMassNearOne) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(0.3, 0.7);
  std::vector<double> values(200);
  for (double& v : values) v = dist(rng);
  const auto curve = estimate_density(values, 0.01);
  double mass = 0.0;
  for (std::size_t i = 1; i < curve.xs.size(); ++i)
    mass += 0.5 * (curve.densities[i] + curve.densities[i - 1]) * (curve.xs[i] - curve.xs[i - 1]);
  EXPECT_NEAR(mass, 1.0, 0.01);
}

TEST(EstimateDensity, Errors) {
  EXPECT_THROW(estimate_density(std::vector<double>{}, 0.1), std::invalid_argument);
  EXPECT_THROW(estimate_density(std::vector<double>{0.5}, 0.0), std::invalid_argument);
}

TEST(DensityQuantile, NearestRank) {
  DensityCurve curve;
  for (int i = 0; i < 512; ++i) {
    curve.xs.push_back(i * kSampleSpacing);
    curve.densities.push_back(static_cast<double>(511 - i));
  }
  // ceil(0.9 * 512) = 461st smallest value is 460.
  EXPECT_DOUBLE_EQ(density_quantile(curve, 90.0), 460.0);
  EXPECT_DOUBLE_EQ(density_quantile(curve, 100.0), 511.0);
}

TEST(HighDensityIntervals, FlatCurveIsEmpty) {
  DensityCurve curve;
  for (int i = 0; i < 512; ++i) {
    curve.xs.push_back(i * kSampleSpacing);
    curve.densities.push_back(2.0);
  }
  EXPECT_TRUE(extract_high_density_intervals(curve, 80.0).empty());
}

TEST(HighDensityIntervals, BimodalGivesTwoIntervals) {
  const auto curve = estimate_density(std::vector<double>{0.2, 0.8}, 0.03);
  const auto intervals = extract_high_density_intervals(curve, 90.0);
  ASSERT_EQ(intervals.size(), 2u);
  EXPECT_TRUE(intervals[0].contains(0.2));
  EXPECT_TRUE(intervals[1].contains(0.8));
  EXPECT_LT(intervals[0].ub, intervals[1].lb);
}

TEST(HighDensityIntervals, SingletonRunWidened) {
  DensityCurve curve;
  for (int i = 0; i < 512; ++i) {
    curve.xs.push_back(i * kSampleSpacing);
    curve.densities.push_back(i == 100 || i == 0 ? 5.0 : 1.0);
  }
  const auto intervals = extract_high_density_intervals(curve, 95.0);
  ASSERT_EQ(intervals.size(), 2u);
  EXPECT_DOUBLE_EQ(intervals[0].lb, 0.0);
  EXPECT_DOUBLE_EQ(intervals[0].ub, curve.xs[1]);
  EXPECT_DOUBLE_EQ(intervals[1].lb, curve.xs[99]);
  EXPECT_DOUBLE_EQ(intervals[1].ub, curve.xs[101]);
}

TEST(HighDensityIntervals, NestingAcrossQuantiles) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> a(0.3, 0.05);
  std::normal_distribution<double> b(0.7, 0.1);
  std::vector<double> values;
  for (int i = 0; i < 150; ++i) values.push_back(std::clamp(a(rng), 0.0, 1.0));
  for (int i = 0; i < 80; ++i) values.push_back(std::clamp(b(rng), 0.0, 1.0));
  const auto curve = estimate_density(values, silverman_bandwidth(values));
  const double qs[] = {80.0, 85.0, 90.0, 95.0};
  for (int hi = 1; hi < 4; ++hi) {
    for (int lo = 0; lo < hi; ++lo) {
      const auto coarse = extract_high_density_intervals(curve, qs[lo]);
      for (const auto& iv : extract_high_density_intervals(curve, qs[hi])) {
        const bool nested = std::any_of(coarse.begin(), coarse.end(),
                                        [&](const Interval& c) { return c.contains(iv); });
        EXPECT_TRUE(nested) << "[" << iv.lb << "," << iv.ub << "] at q=" << qs[hi];
      }
    }
  }
  for (double q : qs) {
    for (const auto& iv : extract_high_density_intervals(curve, q)) {
      EXPECT_GE(iv.lb, 0.0);
      EXPECT_LE(iv.ub, 1.0);
      EXPECT_GE(iv.width(), kSampleSpacing - 1e-15);
    }
  }
}

TEST(SeedRectangles, ClusteredFeatureCoversAllAnomalies) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    std::vector<double> row(5);
    for (double& v : row) v = unit(rng);
    row[3] = 0.6 + 0.001 * (i % 3);
    rows.push_back(row);
    labels.push_back(1);
  }
  for (int i = 0; i < 60; ++i) {
    std::vector<double> row(5);
    for (double& v : row) v = unit(rng);
    rows.push_back(row);
    labels.push_back(0);
  }
  const auto data = testing::make_dataset(rows, labels);
  const auto seeds = seed_rectangles(data, std::vector<double>{80, 85, 90, 95});
  const bool found = std::any_of(seeds.begin(), seeds.end(), [&](const HyperRectangle& r) {
    return r.sides[0].feature == 3 && r.mass == data.anomaly_count();
  });
  EXPECT_TRUE(found);
  for (const auto& r : seeds) {
    EXPECT_EQ(r.level(), 1u);
    const auto enc = mass_and_impurity(r, data);
    EXPECT_EQ(r.mass, enc.mass);
    EXPECT_EQ(r.impurity, enc.impurity);
  }
  EXPECT_TRUE(std::is_sorted(seeds.begin(), seeds.end()));
  EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
}

TEST(SeedRectangles, DegenerateFeaturesSkipped) {
  std::vector<double> values = {3.0, 1.0, 3.0, 1.0, 3.0, 1.0};
  std::vector<Label> labels = {Label::kAnomalous, Label::kNormal, Label::kNormal};
  const auto raw = LabeledDataset(values, labels, {"a", "b"});
  const auto data = normalize(raw);
  ASSERT_TRUE(data.degenerate(0));
  ASSERT_TRUE(data.degenerate(1));
  EXPECT_TRUE(seed_rectangles(data, std::vector<double>{80, 90}).empty());
  EXPECT_THROW(seed_rectangles(data, std::vector<double>{}), std::invalid_argument);
}

TEST(SeedRectangles, Deduplication) {
  // Two features, four quantiles, one interval each; three of the eight
  // intervals repeat an earlier one.
  const Interval a{0.1, 0.2};
  const Interval b{0.1, 0.25};
  const Interval c{0.5, 0.6};
  const Interval e{0.5, 0.7};
  std::vector<HyperRectangle> seeds = {
      testing::rect({{0, a}}), testing::rect({{0, a}}), testing::rect({{0, b}}),
      testing::rect({{0, a}}), testing::rect({{1, c}}), testing::rect({{1, e}}),
      testing::rect({{1, c}}), testing::rect({{1, {0.55, 0.6}}})};
  deduplicate_seeds(seeds);
  EXPECT_EQ(seeds.size(), 5u);
}

TEST(SeedRectangles, Deterministic) {
  SynthConfig cfg;
  cfg.m = 300;
  cfg.d = 6;
  cfg.seed = 4;
  const auto data = normalize(generate_synthetic(cfg).dataset);
  const std::vector<double> qs = {80, 85, 90, 95};
  const auto a = seed_rectangles(data, qs);
  const auto b = seed_rectangles(data, qs);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.empty());
}

}  // namespace
}  // namespace anopack
