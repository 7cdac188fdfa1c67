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
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "anopack/lattice.hpp"
#include "oracles.hpp"

namespace anopack {
namespace {

using testing::make_dataset;
using testing::rect;
using testing::brute_force_rectangles;
using testing::closure_violations;
using testing::random_lattice_fixture;

TEST(MassAndImpurity, FullCoverAndEmpty) {
  const auto data = make_dataset({{0.1}, {0.3}, {0.6}, {0.9}}, {1, 0, 1, 0});
  auto full = mass_and_impurity(rect({{0, {0.0, 1.0}}}), data);
  EXPECT_EQ(full.mass, 2u);
  EXPECT_EQ(full.impurity, 2u);
  auto empty = mass_and_impurity(rect({{0, {0.5, 0.5}}}), data);
  EXPECT_EQ(empty.mass, 0u);
  EXPECT_EQ(empty.impurity, 0u);
}

TEST(MassAndImpurity, HandEnumeratedSixPoints) {
  // f0 values and labels: 0.1 N, 0.2 A, 0.3 A, 0.4 N, 0.41 A, 0.5 N.
  const auto data = make_dataset({{0.1, 0.0}, {0.2, 0.0}, {0.3, 1.0}, {0.4, 0.5}, {0.41, 0.2}, {0.5, 0.9}},
                                 {0, 1, 1, 0, 1, 0});
  const auto enc = mass_and_impurity(rect({{0, {0.2, 0.4}}}), data);
  EXPECT_EQ(enc.mass, 2u);  // inclusive bounds keep 0.2
  EXPECT_EQ(enc.impurity, 1u);
  EXPECT_EQ(enc.anomaly_ids, (IdList{1, 2}));
  EXPECT_EQ(enc.normal_ids, (IdList{3}));
  HyperRectangle r = rect({{0, {0.2, 0.4}}});
  evaluate(r, data);
  EXPECT_EQ(r.mass, 2u);
  EXPECT_EQ(r.impurity, 1u);
}

TEST(GenerateCandidates, BaseJoin) {
  const Interval a{0.1, 0.2};
  const Interval b{0.3, 0.4};
  const auto out = generate_candidates({rect({{1, a}}), rect({{2, b}})});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], rect({{1, a}, {2, b}}));
}

TEST(GenerateCandidates, PruneNeedsEveryProjection) {
  const Interval a{0.1, 0.2};
  const Interval b{0.3, 0.4};
  const Interval c{0.5, 0.6};
  const auto u = rect({{1, a}, {2, b}});
  const auto v = rect({{1, a}, {3, c}});
  EXPECT_TRUE(generate_candidates({u, v}).empty());
  const auto out = generate_candidates({u, v, rect({{2, b}, {3, c}})});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], rect({{1, a}, {2, b}, {3, c}}));
}

TEST(GenerateCandidates, PrefixMismatchAndErrors) {
  const Interval a{0.1, 0.2};
  const Interval a2{0.1, 0.3};
  EXPECT_TRUE(generate_candidates({rect({{1, a}, {2, {0.3, 0.4}}}), rect({{1, a2}, {3, {0.5, 0.6}}})}).empty());
  // Same feature, different intervals never join.
  EXPECT_TRUE(generate_candidates({rect({{1, a}}), rect({{1, a2}})}).empty());
  EXPECT_THROW(generate_candidates({rect({{1, a}}), rect({{1, a}, {2, a}})}), std::invalid_argument);
}

TEST(GenerateCandidates, NoDuplicates) {
  std::vector<HyperRectangle> level;
  for (std::size_t f = 0; f < 4; ++f)
    for (double lo : {0.1, 0.5}) level.push_back(rect({{f, {lo, lo + 0.2}}}));
  level.push_back(level.front());
  auto out = generate_candidates(level);
  EXPECT_EQ(out.size(), 6u * 4u);  // C(4,2) feature pairs x 2 x 2 intervals
  auto sorted = out;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  for (const auto& r : out) EXPECT_TRUE(r.canonical());
}

TEST(DefaultThresholds, Medians) {
  auto seeds_of = [](std::vector<std::pair<std::size_t, std::size_t>> mi) {
    std::vector<HyperRectangle> seeds;
    for (auto [m, i] : mi) seeds.push_back(HyperRectangle{{}, m, i});
    return seeds;
  };
  auto th = default_thresholds(seeds_of({{3, 0}, {5, 2}, {9, 10}}));
  EXPECT_EQ(th.ms, 5u);
  EXPECT_EQ(th.mu, 2u);
  th = default_thresholds(seeds_of({{4, 1}, {8, 3}}));
  EXPECT_EQ(th.ms, 4u);
  EXPECT_EQ(th.mu, 1u);
  th = default_thresholds(seeds_of({{7, 0}}));
  EXPECT_EQ(th.ms, 7u);
  EXPECT_EQ(th.mu, 0u);
  th = default_thresholds(seeds_of({{1, 0}}));
  EXPECT_EQ(th.ms, 2u);
  EXPECT_THROW(default_thresholds({}), std::invalid_argument);
}

TEST(Subclus, NothingReachesMass) {
  const auto data = make_dataset({{0.1, 0.1}, {0.9, 0.9}, {0.5, 0.5}}, {1, 1, 0});
  const auto out = subclus(data, {rect({{0, {0.0, 0.2}}}), rect({{1, {0.8, 1.0}}})}, {2, 0});
  EXPECT_TRUE(out.rectangles.empty());
  EXPECT_EQ(out.levels.size(), 1u);
  EXPECT_TRUE(subclus(data, {}, {2, 0}).rectangles.empty());
}

TEST(Subclus, PlantedTwoDimensionalCluster) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> in(0.42, 0.58);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 12; ++i) {
    rows.push_back({in(rng), in(rng), unit(rng)});
    labels.push_back(1);
  }
  // Normals sit inside one seed interval but never inside both.
  for (int i = 0; i < 20; ++i) {
    rows.push_back({in(rng), i % 2 ? 0.1 : 0.9, unit(rng)});
    rows.push_back({i % 2 ? 0.2 : 0.8, in(rng), unit(rng)});
    labels.push_back(0);
    labels.push_back(0);
  }
  const auto data = make_dataset(rows, labels);
  const Interval seed{0.4, 0.6};
  const auto out = subclus(data, {rect({{0, seed}}), rect({{1, seed}})}, {5, 0});
  const auto target = rect({{0, seed}, {1, seed}});
  auto it = std::find(out.rectangles.begin(), out.rectangles.end(), target);
  ASSERT_NE(it, out.rectangles.end());
  EXPECT_EQ(it->mass, 12u);
  EXPECT_EQ(it->impurity, 0u);
  // The impure 1-d seeds are not reported but fed the join.
  EXPECT_EQ(out.rectangles.size(), 1u);
}

TEST(Subclus, MatchesBruteForceEnumeration) {
  std::size_t compared = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    auto fx = random_lattice_fixture(s);
    std::mt19937_64 rng(s + 1000);
    const Thresholds th{1 + rng() % 6, rng() % 8};
    auto got = subclus(fx.data, fx.seeds, th).rectangles;
    std::sort(got.begin(), got.end());
    const auto want = brute_force_rectangles(fx.data, fx.intervals, th);
    ASSERT_EQ(got.size(), want.size()) << "fixture " << s;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i], want[i]);
      EXPECT_EQ(got[i].mass, want[i].mass);
      EXPECT_EQ(got[i].impurity, want[i].impurity);
    }
    compared += got.size();
  }
  EXPECT_GT(compared, 100u);
}

TEST(Subclus, ClosureInvariants) {
  std::size_t violations = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto fx = random_lattice_fixture(s + 500);
    const Thresholds th{2, 3};
    violations += closure_violations(fx, subclus(fx.data, fx.seeds, th), th);
  }
  EXPECT_EQ(violations, 0u);
}

TEST(Subclus, LevelCapReported) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 6; ++i) {
    rows.push_back({0.5, 0.5, 0.5});
    labels.push_back(1);
  }
  rows.push_back({0.0, 0.0, 0.0});
  labels.push_back(0);
  const auto data = make_dataset(rows, labels);
  const Interval iv{0.4, 0.6};
  std::vector<HyperRectangle> seeds = {rect({{0, iv}}), rect({{1, iv}}), rect({{2, iv}})};
  const auto capped = subclus(data, seeds, {2, 0}, 2);
  EXPECT_TRUE(capped.level_cap_hit);
  EXPECT_EQ(capped.rectangles.size(), 6u);
  const auto full = subclus(data, seeds, {2, 0});
  EXPECT_FALSE(full.level_cap_hit);
  EXPECT_EQ(full.rectangles.size(), 7u);
}

}  // namespace
}  // namespace anopack
