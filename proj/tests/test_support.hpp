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

// Fixture helpers shared by the unit tests.

#ifndef ANOPACK_TESTS_TEST_SUPPORT_HPP_
#define ANOPACK_TESTS_TEST_SUPPORT_HPP_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "anopack/anopack.hpp"

namespace anopack::testing {

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("anopack_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name)) << text;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

// Normalized dataset from rows (each already in [0,1]) and 0/1 labels.
inline LabeledDataset make_dataset(const std::vector<std::vector<double>>& rows,
                                   const std::vector<int>& labels) {
  const std::size_t d = rows.front().size();
  std::vector<double> values;
  std::vector<Label> tags;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values.insert(values.end(), rows[i].begin(), rows[i].end());
    tags.push_back(labels[i] ? Label::kAnomalous : Label::kNormal);
  }
  std::vector<std::string> names;
  for (std::size_t f = 0; f < d; ++f) names.push_back("f" + std::to_string(f));
  NormalizationRecord record{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0),
                             std::vector<bool>(d, false)};
  return LabeledDataset(std::move(values), std::move(tags), std::move(names), record);
}

inline HyperRectangle rect(std::vector<Side> sides) { return HyperRectangle{std::move(sides), 0, 0}; }

// Pack over `subspace` with the given boundary and membership recounted on
// `data`.
inline Pack make_test_pack(std::vector<std::size_t> subspace, std::vector<double> u,
                           std::vector<double> w, double w0, const LabeledDataset& data) {
  BoundaryParams params{std::move(subspace), std::move(u), std::move(w), w0};
  return *make_pack(std::move(params), data);
}

// Pack whose ellipsoid is the axis box [lo, hi] inscribed on one feature.
inline Pack interval_pack(std::size_t feature, double lo, double hi, const LabeledDataset& data) {
  const double c = 0.5 * (lo + hi);
  const double r = 0.5 * (hi - lo);
  // h(x) = -(x - c)^2 + r^2 scaled so that u = -1.
  return make_test_pack({feature}, {-1.0}, {2.0 * c}, r * r - c * c, data);
}

}  // namespace anopack::testing

#endif  // ANOPACK_TESTS_TEST_SUPPORT_HPP_
