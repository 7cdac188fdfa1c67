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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "anopack/mdl.hpp"
#include "test_support.hpp"

namespace anopack {
namespace {

using testing::interval_pack;
using testing::make_dataset;

TEST(LogStar, SmallValues) {
  EXPECT_EQ(log_star(0), 0.0);
  EXPECT_EQ(log_star(1), 0.0);
  EXPECT_DOUBLE_EQ(log_star(2), 1.0);
  EXPECT_DOUBLE_EQ(log_star(4), 3.0);
  EXPECT_DOUBLE_EQ(log_star(16), 7.0);
}

TEST(LogStar, EightMatchesHandExpansion) {
  // 3 + log2(3) + log2(log2(3)); the next term is negative.
  const double expected = 3.0 + std::log2(3.0) + std::log2(std::log2(3.0));
  EXPECT_NEAR(log_star(8), expected, 1e-12);
  EXPECT_NEAR(log_star(8), 5.2494, 1e-3);
}

TEST(LogStar, NonDecreasing) {
  for (std::size_t k = 1; k < 5000; ++k) EXPECT_LE(log_star(k), log_star(k + 1));
}

TEST(Log2Binomial, KnownValues) {
  EXPECT_NEAR(log2_binomial(16, 2), std::log2(120.0), 1e-10);
  EXPECT_EQ(log2_binomial(7, 0), 0.0);
  EXPECT_EQ(log2_binomial(7, 7), 0.0);
  EXPECT_NEAR(log2_binomial(10, 3), log2_binomial(10, 7), 1e-10);
  EXPECT_NEAR(log2_binomial(60, 30), std::log2(118264581564861424.0), 1e-6);
  EXPECT_THROW(log2_binomial(3, 4), std::invalid_argument);
  // Large arguments stay finite.
  EXPECT_TRUE(std::isfinite(log2_binomial(1000000, 500000)));
}

EncodingParams sixteen_features() {
  EncodingParams p;
  p.d = 16;
  p.log2_f = 10.0;
  return p;
}

TEST(PackCost, TwoOfSixteenFeatures) {
  const double cost = pack_cost(PackShape{2, 228, 0}, sixteen_features());
  EXPECT_NEAR(cost, 1.0 + std::log2(120.0) + 40.0, 1e-10);
  EXPECT_NEAR(cost, 47.907, 1e-3);
}

TEST(PackCost, FullSpacePackHasNoSubspaceTerm) {
  EncodingParams p = sixteen_features();
  p.d = 4;
  EXPECT_NEAR(pack_cost(PackShape{4, 30, 0}, p), log_star(4) + 2.0 * 4.0 * 10.0, 1e-12);
}

TEST(PackCost, AllNormalPackPaysOnlyTheExceptionCount) {
  const EncodingParams p = sixteen_features();
  const double base = pack_cost(PackShape{2, 5, 0}, p);
  EXPECT_NEAR(pack_cost(PackShape{2, 5, 5}, p), base + log_star(5), 1e-12);
}

TEST(PackCost, ExceptionsAddCombinatorialTerm) {
  const EncodingParams p = sixteen_features();
  const double base = pack_cost(PackShape{2, 50, 0}, p);
  EXPECT_NEAR(pack_cost(PackShape{2, 50, 3}, p), base + log_star(3) + log2_binomial(50, 3), 1e-10);
}

TEST(PackCost, FullShapeOptionPricesTheMatrix) {
  EncodingParams p = sixteen_features();
  p.full_shape_cost = true;
  EXPECT_NEAR(pack_cost(PackShape{3, 10, 0}, p),
              log_star(3) + log2_binomial(16, 3) + 3.0 * 4.0 * 10.0, 1e-10);
}

TEST(PackCost, RejectsImpossibleShapes) {
  const EncodingParams p = sixteen_features();
  EXPECT_THROW(pack_cost(PackShape{17, 10, 0}, p), std::invalid_argument);
  EXPECT_THROW(pack_cost(PackShape{2, 3, 4}, p), std::invalid_argument);
}

// Dataset with anomalies spread on feature 0 and packs as intervals on it.
struct Fixture {
  LabeledDataset data;
  std::vector<Pack> pool;
};

Fixture random_fixture(std::uint64_t seed, std::size_t pool_size) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 120; ++i) {
    rows.push_back({unit(rng), unit(rng), unit(rng)});
    labels.push_back(unit(rng) < 0.3 ? 1 : 0);
  }
  Fixture f{make_dataset(rows, labels), {}};
  for (std::size_t k = 0; k < pool_size; ++k) {
    const double lo = 0.8 * unit(rng);
    const double hi = lo + 0.05 + 0.15 * unit(rng);
    f.pool.push_back(interval_pack(rng() % 3, lo, hi, f.data));
  }
  return f;
}

TEST(PackingCost, SumsPacksPlusCount) {
  const EncodingParams p = sixteen_features();
  EXPECT_EQ(packing_cost(std::span<const Pack>{}, p), 0.0);
  const auto f = random_fixture(1, 2);
  EncodingParams q = sixteen_features();
  q.d = 3;
  const double one = pack_cost(f.pool[0], q);
  EXPECT_NEAR(packing_cost(std::span<const Pack>(f.pool.data(), 1), q), one, 1e-12);
  EXPECT_NEAR(packing_cost(f.pool, q), 1.0 + one + pack_cost(f.pool[1], q), 1e-12);
}

TEST(Reduction, EmptySubsetIsThePoolConstant) {
  const auto f = random_fixture(2, 8);
  const auto params = make_encoding(f.data, f.pool);
  EXPECT_EQ(reduction_objective(std::span<const Pack>{}, params), params.candidate_pool_cost);
  EXPECT_EQ(params.candidate_pool_cost, packing_cost(f.pool, params));
}

TEST(Reduction, AffineComplementOfDescriptionLength) {
  const auto f = random_fixture(3, 15);
  const auto params = make_encoding(f.data, f.pool);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Pack> subset;
    for (const auto& p : f.pool)
      if (rng() % 2) subset.push_back(p);
    const double r = reduction_objective(subset, params);
    const auto dl = description_length(subset, f.data, params);
    EXPECT_NEAR(r + dl.total_bits - params.candidate_pool_cost - params.naive_bits(), 0.0, 1e-6);
    EXPECT_GE(r, 0.0);
  }
}

TEST(Reduction, UselessPackLowersObjectiveByItsCost) {
  const auto f = random_fixture(5, 2);
  const auto params = make_encoding(f.data, f.pool);
  const std::vector<Pack> one{f.pool[0]};
  std::vector<Pack> two = one;
  two.push_back(f.pool[0]);  // covers nothing new
  const double drop = reduction_objective(one, params) - reduction_objective(two, params);
  EXPECT_NEAR(drop, pack_cost(f.pool[0], params) + log_star(2) - log_star(1), 1e-9);
  EXPECT_GT(drop, 0.0);
}

TEST(Reduction, FixedVariantIsSubmodular) {
  const auto f = random_fixture(6, 15);
  const auto params = make_encoding(f.data, f.pool);
  std::mt19937_64 rng(7);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Pack> small;
    std::vector<Pack> large;
    std::size_t extra = 0;
    const std::size_t held = rng() % f.pool.size();
    for (std::size_t i = 0; i < f.pool.size(); ++i) {
      if (i == held) continue;
      const auto roll = rng() % 3;
      if (roll == 0) {
        small.push_back(f.pool[i]);
        large.push_back(f.pool[i]);
      } else if (roll == 1) {
        large.push_back(f.pool[i]);
        ++extra;
      }
    }
    auto gain = [&](std::vector<Pack> base) {
      const double before = reduction_objective_fixed(base, params);
      base.push_back(f.pool[held]);
      return reduction_objective_fixed(base, params) - before;
    };
    if (gain(small) < gain(large) - 1e-9) ++violations;
  }
  EXPECT_EQ(violations, 0u);
}

TEST(DescriptionLength, CountsOutliersAndSavings) {
  const auto data = make_dataset({{0.1}, {0.15}, {0.5}, {0.9}, {0.3}}, {1, 1, 0, 1, 0});
  const std::vector<Pack> packing{interval_pack(0, 0.05, 0.2, data)};
  EncodingParams params;
  params.d = 1;
  params.a = 3;
  params.log2_f = 10.0;
  const auto report = description_length(packing, data, params);
  EXPECT_EQ(report.outlier_ids, (IdList{3}));
  EXPECT_EQ(report.per_pack_bits.size(), 1u);
  const double pack = pack_cost(PackShape{1, 2, 0}, params);
  EXPECT_NEAR(report.total_bits, 10.0 + pack, 1e-12);
  EXPECT_EQ(report.naive_bits, 30.0);
  EXPECT_NEAR(report.savings_percent, 100.0 * (1.0 - report.total_bits / 30.0), 1e-12);
}

TEST(Encoding, ReadsSizesFromTheData) {
  const auto f = random_fixture(8, 3);
  const auto params = make_encoding(f.data, f.pool, 8.0, true);
  EXPECT_EQ(params.d, 3u);
  EXPECT_EQ(params.m, 120u);
  EXPECT_EQ(params.a, f.data.anomaly_count());
  EXPECT_EQ(params.unit_cost(), 24.0);
  EXPECT_TRUE(params.full_shape_cost);
  EXPECT_THROW(make_encoding(f.data, f.pool, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace anopack
