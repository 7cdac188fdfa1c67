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

// Refinement of hyper-rectangles into axis-aligned hyper-ellipsoids.
//
// A boundary h(x) = sum_z u_z x_z^2 + w_z x_z + w0 with every u_z <= -1 is
// fitted so that anomalies inside the rectangle score h >= 1, nearby
// anomalies are encouraged to (weight alpha) and nearby normals score
// h <= -1 (weight lambda). With a diagonal quadratic term the program is a
// linear program in (u, w, w0). The ellipsoid {h >= 0} becomes a pack, whose
// membership is recounted over the whole dataset.

#ifndef ANOPACK_REFINE_HPP_
#define ANOPACK_REFINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anopack/common.hpp"
#include "anopack/dataset.hpp"
#include "anopack/density.hpp"
#include "anopack/hinge_lp.hpp"
#include "anopack/rectangle.hpp"

namespace anopack {

inline constexpr double kDefaultCoefficientBound = 1e6;
inline constexpr double kDefaultVicinityMargin = 1.0;

inline std::vector<double> default_alpha_grid() {
  return {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
}
inline std::vector<double> default_lambda_grid() {
  return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
}

// Points restricted to a feature subspace, row-major.
struct PointBlock {
  std::size_t dims = 0;
  std::vector<double> coords;

  explicit PointBlock(std::size_t d = 0) : dims(d) {}
  PointBlock(std::size_t d, std::vector<double> c) : dims(d), coords(std::move(c)) {}

  std::size_t size() const { return dims == 0 ? 0 : coords.size() / dims; }
  bool empty() const { return coords.empty(); }
  std::span<const double> row(std::size_t i) const { return {coords.data() + i * dims, dims}; }

  void push(std::span<const double> full, std::span<const std::size_t> features) {
    for (std::size_t f : features) coords.push_back(full[f]);
  }
};

struct Vicinity {
  std::vector<std::size_t> features;
  PointBlock inside;   // anomalies enclosed by the rectangle
  PointBlock near;     // anomalies in the expanded box but outside the rectangle
  PointBlock normals;  // normals in the expanded box
  IdList inside_ids;
  IdList near_ids;
  IdList normal_ids;
};

// Splits the points around `rect`; each side grows by margin * width in both
// directions, clipped to [0,1].
inline Vicinity filter_vicinity(const HyperRectangle& rect, const LabeledDataset& data,
                                double margin) {
  if (margin < 0.0) throw std::invalid_argument("vicinity margin must be non-negative");
  Vicinity v;
  v.features = rect.features();
  const std::size_t k = v.features.size();
  v.inside = PointBlock(k);
  v.near = PointBlock(k);
  v.normals = PointBlock(k);
  HyperRectangle expanded = rect;
  for (auto& s : expanded.sides) {
    const double grow = margin * s.interval.width();
    s.interval = {std::max(0.0, s.interval.lb - grow), std::min(1.0, s.interval.ub + grow)};
  }
  for (PointId i = 0; i < data.size(); ++i) {
    const auto x = data.point(i);
    if (!expanded.contains(x)) continue;
    if (!data.is_anomaly(i)) {
      v.normals.push(x, v.features);
      v.normal_ids.push_back(i);
    } else if (rect.contains(x)) {
      v.inside.push(x, v.features);
      v.inside_ids.push_back(i);
    } else {
      v.near.push(x, v.features);
      v.near_ids.push_back(i);
    }
  }
  return v;
}

// Diagonal quadratic boundary over `subspace`.
struct BoundaryParams {
  std::vector<std::size_t> subspace;
  std::vector<double> u;
  std::vector<double> w;
  double w0 = 0.0;

  std::size_t dims() const { return subspace.size(); }

  double evaluate_local(std::span<const double> x) const {
    double h = w0;
    for (std::size_t z = 0; z < u.size(); ++z) h += (u[z] * x[z] + w[z]) * x[z];
    return h;
  }
  // Uses only the subspace coordinates of a full d-vector.
  double evaluate(std::span<const double> point) const {
    double h = w0;
    for (std::size_t z = 0; z < u.size(); ++z) {
      const double x = point[subspace[z]];
      h += (u[z] * x + w[z]) * x;
    }
    return h;
  }
};

struct BoundaryFit {
  BoundaryParams params;
  std::vector<double> slack_inside;
  std::vector<double> slack_near;
  std::vector<double> slack_normals;
  double objective = 0.0;
  double dual_bound = 0.0;
  bool hit_coefficient_bound = false;
  std::size_t iterations = 0;
};

enum class FitMethod { kSimplex, kInteriorPoint };

struct FitOptions {
  double coefficient_bound = kDefaultCoefficientBound;
  FitMethod method = FitMethod::kSimplex;
};

// Solves the slack-penalized discrimination program with diagonal U. Inside
// points carry weight 1, near anomalies alpha and normals lambda. A previous
// solution (u, w, w0 concatenated) may be passed as the descent start.
inline BoundaryFit fit_boundary(const PointBlock& inside, const PointBlock& near,
                                const PointBlock& normals, double alpha, double lambda,
                                const FitOptions& options = {},
                                std::span<const double> warm_start = {}) {
  if (inside.empty()) throw std::invalid_argument("boundary fit needs enclosed anomalies");
  if (!(alpha > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("penalty weights must be positive");
  const std::size_t k = inside.dims;
  const std::size_t r = 2 * k + 1;
  const double bound = options.coefficient_bound;

  lp::HingeProblem prob;
  prob.dims = r;
  prob.lower.resize(r);
  prob.upper.resize(r);
  for (std::size_t z = 0; z < k; ++z) {
    prob.lower[z] = -bound;
    prob.upper[z] = -1.0;
    prob.lower[k + z] = -bound;
    prob.upper[k + z] = bound;
  }
  prob.lower[2 * k] = -bound;
  prob.upper[2 * k] = bound;

  auto append = [&](const PointBlock& block, double sign, double weight) {
    for (std::size_t i = 0; i < block.size(); ++i) {
      const auto x = block.row(i);
      for (std::size_t z = 0; z < k; ++z) prob.rows.push_back(sign * x[z] * x[z]);
      for (std::size_t z = 0; z < k; ++z) prob.rows.push_back(sign * x[z]);
      prob.rows.push_back(sign);
      prob.weights.push_back(weight);
    }
  };
  append(inside, 1.0, 1.0);
  append(near, 1.0, alpha);
  append(normals, -1.0, lambda);

  const lp::HingeSolution sol = options.method == FitMethod::kInteriorPoint
                                    ? lp::solve_interior_point(prob)
                                    : lp::solve_descent(prob, warm_start);

  BoundaryFit fit;
  fit.params.u.assign(sol.theta.begin(), sol.theta.begin() + static_cast<std::ptrdiff_t>(k));
  fit.params.w.assign(sol.theta.begin() + static_cast<std::ptrdiff_t>(k),
                      sol.theta.begin() + static_cast<std::ptrdiff_t>(2 * k));
  fit.params.w0 = sol.theta[2 * k];
  fit.objective = sol.objective;
  fit.dual_bound = sol.dual_bound;
  fit.iterations = sol.iterations;
  for (std::size_t i = 0; i < r; ++i) {
    if (std::abs(sol.theta[i]) >= bound * (1.0 - 1e-6)) fit.hit_coefficient_bound = true;
  }

  auto slacks = [&](const PointBlock& block, double sign) {
    std::vector<double> out(block.size());
    for (std::size_t i = 0; i < block.size(); ++i)
      out[i] = std::max(0.0, 1.0 - sign * fit.params.evaluate_local(block.row(i)));
    return out;
  };
  fit.slack_inside = slacks(inside, 1.0);
  fit.slack_near = slacks(near, 1.0);
  fit.slack_normals = slacks(normals, -1.0);
  return fit;
}

class EmptyEllipsoidError : public SolverError {
 public:
  EmptyEllipsoidError() : SolverError("boundary encloses no region (h < 0 everywhere)") {}
};

struct Ellipsoid {
  std::vector<double> center;
  std::vector<double> inv_shape;  // diagonal of M^-1
  std::vector<double> radii;      // sqrt(M_zz)

  // (x-c)' M^-1 (x-c) over subspace-local coordinates.
  double distance2_local(std::span<const double> x) const {
    double acc = 0.0;
    for (std::size_t z = 0; z < center.size(); ++z) {
      const double d = x[z] - center[z];
      acc += d * d * inv_shape[z];
    }
    return acc;
  }
};

inline std::optional<Ellipsoid> try_to_ellipsoid(const BoundaryParams& params) {
  const std::size_t k = params.u.size();
  Ellipsoid e;
  e.center.resize(k);
  double scale = params.w0;
  for (std::size_t z = 0; z < k; ++z) {
    if (!(params.u[z] < 0.0)) return std::nullopt;
    e.center[z] = -params.w[z] / (2.0 * params.u[z]);
    scale -= params.u[z] * e.center[z] * e.center[z];
  }
  if (!(scale > 0.0)) return std::nullopt;
  e.inv_shape.resize(k);
  e.radii.resize(k);
  for (std::size_t z = 0; z < k; ++z) {
    e.inv_shape[z] = -params.u[z] / scale;
    e.radii[z] = std::sqrt(scale / -params.u[z]);
  }
  return e;
}

// Center, inverse shape and radii of {h >= 0}. Throws EmptyEllipsoidError
// when that region is empty.
inline Ellipsoid to_ellipsoid(const BoundaryParams& params) {
  auto e = try_to_ellipsoid(params);
  if (!e) throw EmptyEllipsoidError();
  return *e;
}

struct Provenance {
  std::size_t rectangle = 0;
  double alpha = 0.0;
  double lambda = 0.0;
};

struct Pack {
  BoundaryParams params;
  Ellipsoid shape;
  IdList covered_anomalies;
  IdList enclosed_normals;
  Provenance provenance;

  std::size_t dimension() const { return params.dims(); }
  std::size_t mass() const { return covered_anomalies.size(); }
  std::size_t impurity() const { return enclosed_normals.size(); }

  bool contains(std::span<const double> point) const {
    double acc = 0.0;
    for (std::size_t z = 0; z < shape.center.size(); ++z) {
      const double d = point[params.subspace[z]] - shape.center[z];
      acc += d * d * shape.inv_shape[z];
    }
    return acc <= 1.0;
  }
  double score(std::span<const double> point) const { return params.evaluate(point); }
};

// Builds a pack from boundary parameters, recounting membership over every
// point of `data`. Returns nullopt for an empty ellipsoid.
inline std::optional<Pack> make_pack(BoundaryParams params, const LabeledDataset& data,
                                     Provenance provenance = {}) {
  auto shape = try_to_ellipsoid(params);
  if (!shape) return std::nullopt;
  Pack pack;
  pack.params = std::move(params);
  pack.shape = std::move(*shape);
  pack.provenance = provenance;
  for (PointId i = 0; i < data.size(); ++i) {
    if (!pack.contains(data.point(i))) continue;
    (data.is_anomaly(i) ? pack.covered_anomalies : pack.enclosed_normals).push_back(i);
  }
  return pack;
}

// Indices of the (mass, impurity) pairs not strictly dominated by another;
// among exact ties the first is kept.
inline std::vector<std::size_t> pareto_indices(
    std::span<const std::pair<std::size_t, std::size_t>> points) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (i == j) continue;
      const auto [mj, ij] = points[j];
      const auto [mi, ii] = points[i];
      const bool weakly = mj >= mi && ij <= ii;
      const bool strictly = mj > mi || ij < ii;
      if (weakly && strictly) dominated = true;
      if (mj == mi && ij == ii && j < i) dominated = true;
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

inline std::vector<Pack> pareto_frontier(std::vector<Pack> packs) {
  std::vector<std::pair<std::size_t, std::size_t>> points;
  points.reserve(packs.size());
  for (const auto& p : packs) points.emplace_back(p.mass(), p.impurity());
  std::vector<Pack> out;
  for (std::size_t i : pareto_indices(points)) out.push_back(std::move(packs[i]));
  return out;
}

struct RefineOptions {
  std::vector<double> alphas = default_alpha_grid();
  std::vector<double> lambdas = default_lambda_grid();
  double margin = kDefaultVicinityMargin;
  FitOptions fit;
};

struct RefineStats {
  std::size_t cells = 0;
  std::size_t solver_failures = 0;
  std::size_t empty_ellipsoids = 0;
  std::size_t coefficient_bound_hits = 0;
};

// Sweeps the (alpha, lambda) grid for one rectangle and returns the Pareto
// frontier of the resulting packs, in grid order.
inline std::vector<Pack> refine_rectangle(const HyperRectangle& rect, const LabeledDataset& data,
                                          const RefineOptions& options = {},
                                          std::size_t rectangle_index = 0,
                                          RefineStats* stats = nullptr) {
  RefineStats local;
  const Vicinity v = filter_vicinity(rect, data, options.margin);
  std::vector<Pack> candidates;
  if (v.inside.empty()) {
    if (stats) *stats = local;
    return candidates;
  }
  std::vector<BoundaryParams> seen;
  std::vector<std::size_t> seen_pack;  // index into candidates, or npos
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // Neighbouring grid cells have nearby optima: each cell starts from the
  // same lambda in the previous row, or else from the previous cell.
  std::vector<double> previous;
  std::vector<std::vector<double>> column(options.lambdas.size());
  auto flatten = [](const BoundaryParams& p) {
    std::vector<double> theta = p.u;
    theta.insert(theta.end(), p.w.begin(), p.w.end());
    theta.push_back(p.w0);
    return theta;
  };
  for (double alpha : options.alphas) {
    previous.clear();
    for (std::size_t li = 0; li < options.lambdas.size(); ++li) {
      const double lambda = options.lambdas[li];
      ++local.cells;
      BoundaryFit fit;
      try {
        fit = fit_boundary(v.inside, v.near, v.normals, alpha, lambda, options.fit,
                           column[li].empty() ? previous : column[li]);
      } catch (const SolverError&) {
        ++local.solver_failures;
        continue;
      }
      previous = flatten(fit.params);
      column[li] = previous;
      if (fit.hit_coefficient_bound) ++local.coefficient_bound_hits;
      fit.params.subspace = v.features;
      const Provenance prov{rectangle_index, alpha, lambda};

      // Identical solutions share one membership scan.
      std::size_t reuse = kNone;
      for (std::size_t s = 0; s < seen.size(); ++s) {
        if (seen[s].u == fit.params.u && seen[s].w == fit.params.w &&
            seen[s].w0 == fit.params.w0) {
          reuse = s;
          break;
        }
      }
      if (reuse != kNone) {
        if (seen_pack[reuse] == kNone) {
          ++local.empty_ellipsoids;
        } else {
          Pack copy = candidates[seen_pack[reuse]];
          copy.provenance = prov;
          candidates.push_back(std::move(copy));
        }
        continue;
      }
      seen.push_back(fit.params);
      auto pack = make_pack(std::move(fit.params), data, prov);
      if (!pack) {
        ++local.empty_ellipsoids;
        seen_pack.push_back(kNone);
        continue;
      }
      seen_pack.push_back(candidates.size());
      candidates.push_back(std::move(*pack));
    }
  }
  if (stats) *stats = local;
  return pareto_frontier(std::move(candidates));
}

struct FeatureRule {
  std::size_t feature = 0;
  std::string name;
  double center = 0.0;
  double radius = 0.0;
  Interval normalized;  // (c - r, c + r) clipped to [0,1]
  Interval raw;
  bool degenerate = false;  // radius below the density grid spacing
};

struct Signature {
  std::vector<FeatureRule> rules;
  std::size_t mass = 0;
  std::size_t impurity = 0;
};

// Center +/- radius interval per subspace feature, clipped to [0,1] and also
// reported in raw units.
inline Signature feature_rules(const Pack& pack, const NormalizationRecord& record,
                               std::span<const std::string> names) {
  Signature sig;
  sig.mass = pack.mass();
  sig.impurity = pack.impurity();
  for (std::size_t z = 0; z < pack.dimension(); ++z) {
    FeatureRule rule;
    rule.feature = pack.params.subspace[z];
    rule.name = rule.feature < names.size() ? names[rule.feature] : std::to_string(rule.feature);
    rule.center = pack.shape.center[z];
    rule.radius = pack.shape.radii[z];
    rule.degenerate = rule.radius < kSampleSpacing;
    rule.normalized = {std::clamp(rule.center - rule.radius, 0.0, 1.0),
                       std::clamp(rule.center + rule.radius, 0.0, 1.0)};
    rule.raw = {record.to_raw(rule.feature, rule.normalized.lb),
                record.to_raw(rule.feature, rule.normalized.ub)};
    sig.rules.push_back(std::move(rule));
  }
  return sig;
}

}  // namespace anopack

#endif  // ANOPACK_REFINE_HPP_
