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

// Weighted hinge linear program over a box:
//
//   min_theta  sum_p c_p * max(0, 1 - a_p' theta)   s.t.  lo <= theta <= hi
//
// written with explicit slacks eps_p >= 0 and a_p' theta + eps_p >= 1. Three
// solvers are provided: vertex descent in theta space, the bounded simplex
// applied to the dual program, and a primal-dual interior point method whose
// Newton systems reduce to a dense solve in theta. All report an objective
// and a dual lower bound.

#ifndef ANOPACK_HINGE_LP_HPP_
#define ANOPACK_HINGE_LP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "anopack/common.hpp"
#include "anopack/simplex.hpp"

namespace anopack::lp {

struct HingeProblem {
  std::size_t dims = 0;          // length of theta
  std::vector<double> rows;      // points x dims, row-major, sign already applied
  std::vector<double> weights;   // c_p > 0
  std::vector<double> lower;     // per theta coordinate
  std::vector<double> upper;

  std::size_t points() const { return weights.size(); }
  std::span<const double> row(std::size_t p) const {
    return {rows.data() + p * dims, dims};
  }

  double margin(std::size_t p, std::span<const double> theta) const {
    double acc = 0.0;
    const double* a = rows.data() + p * dims;
    for (std::size_t k = 0; k < dims; ++k) acc += a[k] * theta[k];
    return acc;
  }

  double objective(std::span<const double> theta) const {
    double total = 0.0;
    for (std::size_t p = 0; p < points(); ++p)
      total += weights[p] * std::max(0.0, 1.0 - margin(p, theta));
    return total;
  }
};

struct HingeSolution {
  std::vector<double> theta;
  double objective = 0.0;    // hinge objective evaluated at theta
  double dual_bound = 0.0;   // lower bound on the optimum from the final duals
  std::size_t iterations = 0;
};

struct InteriorPointOptions {
  std::size_t max_iterations = 200;
  double tolerance = 1e-9;  // relative gap and scaled residuals
  std::size_t stall_iterations = 10;
  double step_fraction = 0.995;
};

namespace detail {

// Cholesky solve of a symmetric positive definite r x r row-major system.
inline bool cholesky_solve(std::vector<double> a, std::vector<double>& b, std::size_t r) {
  double scale = 0.0;
  for (std::size_t i = 0; i < r; ++i) scale = std::max(scale, std::abs(a[i * r + i]));
  const double reg = 1e-15 * std::max(scale, 1.0);
  for (std::size_t i = 0; i < r; ++i) a[i * r + i] += reg;
  for (std::size_t j = 0; j < r; ++j) {
    double d = a[j * r + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * r + k] * a[j * r + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * r + j] = d;
    for (std::size_t i = j + 1; i < r; ++i) {
      double s = a[i * r + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * r + k] * a[j * r + k];
      a[i * r + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < r; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * r + k] * b[k];
    b[i] = s / a[i * r + i];
  }
  for (std::size_t i = r; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < r; ++k) s -= a[k * r + i] * b[k];
    b[i] = s / a[i * r + i];
  }
  return true;
}

// Lower bound on the optimum from multipliers y clamped into [0, c]:
// sum y_p - max over the box of (sum y_p a_p)' theta.
inline double dual_bound(const HingeProblem& prob, std::span<const double> y,
                         std::vector<double>& g) {
  const std::size_t r = prob.dims;
  g.assign(r, 0.0);
  double bound = 0.0;
  for (std::size_t p = 0; p < prob.points(); ++p) {
    const double yp = std::clamp(y[p], 0.0, prob.weights[p]);
    bound += yp;
    const double* a = prob.rows.data() + p * r;
    for (std::size_t k = 0; k < r; ++k) g[k] += yp * a[k];
  }
  for (std::size_t k = 0; k < r; ++k)
    bound -= std::max(prob.upper[k] * g[k], prob.lower[k] * g[k]);
  return bound;
}

}  // namespace detail

namespace detail {

// Simplex on the dual program
//
//   min  sum_k (hi_k a_k - lo_k b_k) - sum_p y_p
//   s.t. sum_p y_p a_p - a + b = 0,  0 <= y_p <= c_p,  a, b >= 0
//
// over the points in `free_points`, with the points in `at_upper` held at
// y_p = c_p and every other point at zero. Theta is read off the simplex
// multipliers as -pi; the bound comes from the assembled full dual vector.
inline HingeSolution dual_simplex(const HingeProblem& prob, std::span<const std::size_t> free_points,
                                  std::span<const std::size_t> at_upper, const Options& options) {
  const std::size_t r = prob.dims;
  const std::size_t n = free_points.size();
  Problem lp;
  lp.rows = r;
  lp.cols = n + 2 * r;
  lp.matrix.assign(lp.rows * lp.cols, 0.0);
  lp.rhs.assign(r, 0.0);
  lp.cost.resize(lp.cols);
  lp.lower.assign(lp.cols, 0.0);
  lp.upper.resize(lp.cols);
  for (std::size_t p : at_upper)
    for (std::size_t k = 0; k < r; ++k) lp.rhs[k] -= prob.weights[p] * prob.rows[p * r + k];
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t p = free_points[j];
    for (std::size_t k = 0; k < r; ++k) lp.matrix[j * r + k] = prob.rows[p * r + k];
    lp.cost[j] = -1.0;
    lp.upper[j] = prob.weights[p];
  }
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t a = n + k;
    const std::size_t b = n + r + k;
    lp.matrix[a * r + k] = -1.0;
    lp.matrix[b * r + k] = 1.0;
    lp.cost[a] = prob.upper[k];
    lp.cost[b] = -prob.lower[k];
    lp.upper[a] = kInfinity;
    lp.upper[b] = kInfinity;
  }
  // With every free point at zero, one box column per row absorbs the
  // right-hand side with a non-negative value.
  Start start;
  start.state.assign(lp.cols, VarState::kAtLower);
  for (std::size_t k = 0; k < r; ++k) start.basis.push_back(lp.rhs[k] < 0.0 ? n + k : n + r + k);

  const Solution sol = solve(lp, start, options);
  HingeSolution out;
  out.theta.resize(r);
  for (std::size_t k = 0; k < r; ++k)
    out.theta[k] = std::clamp(-sol.duals[k], prob.lower[k], prob.upper[k]);
  out.objective = prob.objective(out.theta);
  std::vector<double> y(prob.points(), 0.0);
  for (std::size_t p : at_upper) y[p] = prob.weights[p];
  for (std::size_t j = 0; j < n; ++j) y[free_points[j]] = sol.x[j];
  std::vector<double> g;
  out.dual_bound = dual_bound(prob, y, g);
  out.iterations = sol.iterations;
  return out;
}

// Vertex descent on the hinge objective in theta space. A vertex is fixed by
// `dims` tight constraints, each a unit margin a_p' theta = 1 or a box bound.
// A step releases one of them along the edge of steepest descent and moves
// to the minimum of the objective on that edge, passing any number of hinge
// breakpoints at once.
class VertexDescent {
 public:
  explicit VertexDescent(const HingeProblem& prob)
      : prob_(prob), r_(prob.dims), n_(prob.points()) {}

  // Returns false when the walk stalls or breaks down numerically.
  bool run(std::span<const double> start, std::size_t max_steps) {
    theta_.assign(r_, 0.0);
    for (std::size_t k = 0; k < r_; ++k)
      theta_[k] = std::clamp(start.empty() ? 0.0 : start[k], prob_.lower[k], prob_.upper[k]);
    weight_scale_ = 0.0;
    for (std::size_t p = 0; p < n_; ++p) {
      double big = 0.0;
      for (double v : prob_.row(p)) big = std::max(big, std::abs(v));
      weight_scale_ += prob_.weights[p] * big;
    }
    residual_.assign(n_, 0.0);
    tolerance_.assign(n_, 0.0);
    update_residuals();
    if (!reach_vertex()) return false;
    std::size_t flat_steps = 0;
    for (steps_ = 0; steps_ < max_steps; ++steps_) {
      const Move move = price();
      if (move.row == r_) return true;
      double step = 0.0;
      std::size_t entering = 0;
      if (!line_search(move.direction, move.slope, false, step, entering)) return false;
      flat_steps = step == 0.0 ? flat_steps + 1 : 0;
      if (flat_steps > 2 * r_ + 10) return false;
      in_basis_[basis_[move.row]] = 0;
      in_basis_[entering] = 1;
      basis_[move.row] = entering;
      if (!factor()) return false;
    }
    return false;
  }

  // Points on the margin at the final vertex and points with an active hinge.
  void split(std::vector<std::size_t>& tight, std::vector<std::size_t>& active) const {
    tight.clear();
    active.clear();
    for (std::size_t p = 0; p < n_; ++p) {
      if (std::abs(residual_[p]) <= tolerance_[p]) tight.push_back(p);
      else if (residual_[p] > 0.0) active.push_back(p);
    }
  }

  // Objective, bound and theta at the final vertex.
  HingeSolution solution() const {
    HingeSolution out;
    out.theta.resize(r_);
    for (std::size_t k = 0; k < r_; ++k)
      out.theta[k] = std::clamp(theta_[k], prob_.lower[k], prob_.upper[k]);
    out.objective = prob_.objective(out.theta);
    // Basic multipliers solve M' w = -h, h summing c_p a_p over active hinges.
    std::vector<double> y(n_, 0.0);
    std::vector<double> h(r_, 0.0);
    for (std::size_t p = 0; p < n_; ++p) {
      if (in_basis_[p]) continue;
      if (!(residual_[p] > tolerance_[p])) continue;
      y[p] = prob_.weights[p];
      const double* a = prob_.rows.data() + p * r_;
      for (std::size_t k = 0; k < r_; ++k) h[k] += prob_.weights[p] * a[k];
    }
    for (std::size_t i = 0; i < r_; ++i) {
      if (basis_[i] >= n_) continue;
      double w = 0.0;
      for (std::size_t k = 0; k < r_; ++k) w -= inverse_[k * r_ + i] * h[k];
      y[basis_[i]] = w;
    }
    std::vector<double> g;
    out.dual_bound = dual_bound(prob_, y, g);
    out.iterations = steps_;
    return out;
  }

 private:
  struct Move {
    std::size_t row;
    std::vector<double> direction;
    double slope;
  };

  struct Event {
    double t;
    double increase;
    std::size_t id;
  };

  bool is_point(std::size_t id) const { return id < n_; }

  void normal(std::size_t id, std::vector<double>& out) const {
    out.assign(r_, 0.0);
    if (is_point(id)) {
      std::copy_n(prob_.rows.data() + id * r_, r_, out.begin());
    } else {
      out[(id - n_) % r_] = 1.0;
    }
  }

  double level(std::size_t id) const {
    if (is_point(id)) return 1.0;
    const std::size_t k = (id - n_) % r_;
    return id - n_ < r_ ? prob_.lower[k] : prob_.upper[k];
  }

  void update_residual(std::size_t p) {
    const double* a = prob_.rows.data() + p * r_;
    double m = 0.0;
    double scale = 1.0;
    for (std::size_t k = 0; k < r_; ++k) {
      m += a[k] * theta_[k];
      scale += std::abs(a[k] * theta_[k]);
    }
    residual_[p] = 1.0 - m;
    tolerance_[p] = 1e-9 * scale;
  }

  void update_residuals() {
    for (std::size_t p = 0; p < n_; ++p) update_residual(p);
  }

  // Exact right derivative of the objective at theta along d.
  double slope(const std::vector<double>& d) const {
    double total = 0.0;
    for (std::size_t p = 0; p < n_; ++p) {
      const double* a = prob_.rows.data() + p * r_;
      double s = 0.0;
      for (std::size_t k = 0; k < r_; ++k) s += a[k] * d[k];
      if (residual_[p] > tolerance_[p]) {
        total -= prob_.weights[p] * s;
      } else if (residual_[p] >= -tolerance_[p] && s < 0.0) {
        total -= prob_.weights[p] * s;
      }
    }
    return total;
  }

  // Largest step along d up to the minimum of the objective on the ray; with
  // `first_stop` the walk halts at the first breakpoint instead. Reports the
  // constraint that becomes tight there.
  bool line_search(const std::vector<double>& d, double initial_slope, bool first_stop,
                   double& step, std::size_t& entering) {
    double box_step = kInfinity;
    std::size_t box_id = 0;
    for (std::size_t k = 0; k < r_; ++k) {
      double t = kInfinity;
      std::size_t id = 0;
      if (d[k] > 0.0) {
        t = (prob_.upper[k] - theta_[k]) / d[k];
        id = n_ + r_ + k;
      } else if (d[k] < 0.0) {
        t = (prob_.lower[k] - theta_[k]) / d[k];
        id = n_ + k;
      }
      if (in_basis_[id] || !(t < box_step)) continue;
      box_step = std::max(0.0, t);
      box_id = id;
    }
    events_.clear();
    for (std::size_t p = 0; p < n_; ++p) {
      if (in_basis_[p]) continue;
      const double res = residual_[p];
      if (std::abs(res) <= tolerance_[p]) continue;
      const double* a = prob_.rows.data() + p * r_;
      double s = 0.0;
      for (std::size_t k = 0; k < r_; ++k) s += a[k] * d[k];
      if ((res > 0.0 && s > 0.0) || (res < 0.0 && s < 0.0)) {
        const double t = res / s;
        if (t < box_step) events_.push_back({t, prob_.weights[p] * std::abs(s), p});
      }
    }
    // Min-heap on (t, id): only the breakpoints before the stop are popped.
    auto later = [](const Event& x, const Event& y) {
      return x.t > y.t || (x.t == y.t && x.id > y.id);
    };
    std::make_heap(events_.begin(), events_.end(), later);
    double current = initial_slope;
    while (!events_.empty()) {
      std::pop_heap(events_.begin(), events_.end(), later);
      const Event e = events_.back();
      events_.pop_back();
      current += e.increase;
      if (first_stop || current >= 0.0) {
        step = e.t;
        entering = e.id;
        move(d, step);
        return true;
      }
    }
    if (!std::isfinite(box_step)) return false;
    step = box_step;
    entering = box_id;
    move(d, step);
    return true;
  }

  // Residuals are stale until the caller refreshes them.
  void move(const std::vector<double>& d, double step) {
    for (std::size_t k = 0; k < r_; ++k) theta_[k] += step * d[k];
  }

  std::vector<double> project(std::vector<double> v) const {
    for (const auto& q : frame_) {
      double dot = 0.0;
      for (std::size_t k = 0; k < r_; ++k) dot += q[k] * v[k];
      for (std::size_t k = 0; k < r_; ++k) v[k] -= dot * q[k];
    }
    return v;
  }

  // Adds constraint `id` when its normal is independent of the current ones.
  bool try_add(std::size_t id) {
    std::vector<double> v;
    normal(id, v);
    double size = 0.0;
    for (double x : v) size = std::max(size, std::abs(x));
    v = project(std::move(v));
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 1e-9 * size)) return false;
    for (double& x : v) x /= norm;
    frame_.push_back(std::move(v));
    basis_.push_back(id);
    in_basis_[id] = 1;
    return true;
  }

  // Grows the tight set to a vertex, moving along directions in the null
  // space of the current constraints that do not increase the objective.
  bool reach_vertex() {
    basis_.clear();
    frame_.clear();
    in_basis_.assign(n_ + 2 * r_, 0);
    while (basis_.size() < r_) {
      for (std::size_t k = 0; k < r_ && basis_.size() < r_; ++k) {
        if (theta_[k] <= prob_.lower[k]) try_add(n_ + k);
        else if (theta_[k] >= prob_.upper[k]) try_add(n_ + r_ + k);
      }
      for (std::size_t p = 0; p < n_ && basis_.size() < r_; ++p)
        if (std::abs(residual_[p]) <= tolerance_[p]) try_add(p);
      if (basis_.size() == r_) break;

      // Projected descent direction, or any free direction when flat.
      std::vector<double> grad(r_, 0.0);
      for (std::size_t p = 0; p < n_; ++p) {
        if (!(residual_[p] > tolerance_[p])) continue;
        const double* a = prob_.rows.data() + p * r_;
        for (std::size_t k = 0; k < r_; ++k) grad[k] -= prob_.weights[p] * a[k];
      }
      std::vector<double> d = project(grad);
      double gsize = 0.0;
      double dsize = 0.0;
      for (std::size_t k = 0; k < r_; ++k) {
        gsize = std::max(gsize, std::abs(grad[k]));
        dsize = std::max(dsize, std::abs(d[k]));
      }
      if (dsize <= 1e-12 * gsize || dsize == 0.0) {
        dsize = 0.0;
        for (std::size_t k = 0; k < r_; ++k) {
          std::vector<double> e(r_, 0.0);
          e[k] = 1.0;
          std::vector<double> v = project(e);
          double size = 0.0;
          for (double x : v) size = std::max(size, std::abs(x));
          if (size > dsize) {
            dsize = size;
            d = std::move(v);
          }
        }
        if (dsize == 0.0) return false;
      } else {
        for (double& x : d) x = -x;
      }
      double s = slope(d);
      if (s > 0.0) {
        for (double& x : d) x = -x;
        s = slope(d);
      }
      double step = 0.0;
      std::size_t entering = 0;
      if (!line_search(d, s, s >= 0.0, step, entering)) return false;
      update_residuals();
      if (!try_add(entering)) return false;
    }
    return factor();
  }

  // Inverts the vertex system and snaps theta onto it.
  bool factor() {
    std::vector<double> m(r_ * r_);
    std::vector<double> v;
    for (std::size_t i = 0; i < r_; ++i) {
      normal(basis_[i], v);
      std::copy(v.begin(), v.end(), m.begin() + static_cast<std::ptrdiff_t>(i * r_));
    }
    if (!invert(m, r_)) return false;
    inverse_ = std::move(m);
    for (std::size_t k = 0; k < r_; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < r_; ++i) acc += inverse_[k * r_ + i] * level(basis_[i]);
      theta_[k] = acc;
    }
    update_residuals();
    return true;
  }

  // Steepest improving edge; row == dims when none improves. Away from the
  // margin the slope is linear in the direction, so one aggregated gradient
  // serves every edge and only the points on the margin are visited.
  Move price() const {
    Move best{r_, {}, 0.0};
    std::vector<double> h(r_, 0.0);
    std::vector<std::size_t> kinks;
    for (std::size_t p = 0; p < n_; ++p) {
      if (in_basis_[p]) continue;
      if (residual_[p] > tolerance_[p]) {
        const double* a = prob_.rows.data() + p * r_;
        for (std::size_t k = 0; k < r_; ++k) h[k] += prob_.weights[p] * a[k];
      } else if (residual_[p] >= -tolerance_[p]) {
        kinks.push_back(p);
      }
    }
    double best_score = 0.0;
    std::vector<double> d(r_);
    for (std::size_t i = 0; i < r_; ++i) {
      const std::size_t id = basis_[i];
      for (double sign : {1.0, -1.0}) {
        if (!is_point(id) && sign != (id - n_ < r_ ? 1.0 : -1.0)) continue;
        double length = 0.0;
        double s = 0.0;
        for (std::size_t k = 0; k < r_; ++k) {
          d[k] = sign * inverse_[k * r_ + i];
          length += std::abs(d[k]);
          s -= h[k] * d[k];
        }
        for (std::size_t p : kinks) {
          const double* a = prob_.rows.data() + p * r_;
          double ad = 0.0;
          for (std::size_t k = 0; k < r_; ++k) ad += a[k] * d[k];
          if (ad < 0.0) s -= prob_.weights[p] * ad;
        }
        if (is_point(id) && sign < 0.0) s += prob_.weights[id];
        if (!(s < -1e-11 * weight_scale_ * length)) continue;
        const double score = s / length;
        if (score < best_score) {
          best_score = score;
          best = {i, d, s};
        }
      }
    }
    return best;
  }

  const HingeProblem& prob_;
  std::size_t r_;
  std::size_t n_;
  std::vector<double> theta_;
  std::vector<std::size_t> basis_;
  std::vector<std::vector<double>> frame_;
  std::vector<double> inverse_;
  std::vector<double> residual_;
  std::vector<double> tolerance_;
  std::vector<char> in_basis_;
  std::vector<Event> events_;
  double weight_scale_ = 0.0;
  std::size_t steps_ = 0;
};

}  // namespace detail

// Exact vertex solution by the simplex method on the dual program.
inline HingeSolution solve_simplex(const HingeProblem& prob, const Options& options = {}) {
  std::vector<std::size_t> all(prob.points());
  for (std::size_t p = 0; p < all.size(); ++p) all[p] = p;
  return detail::dual_simplex(prob, all, {}, options);
}

// Relative gap between objective and certified bound accepted as optimal.
inline constexpr double kCertificateTolerance = 1e-6;

// Vertex descent started from `hint`, which may be empty. The result is
// accepted once the dual bound certifies it. At a degenerate vertex the
// multipliers of the points on the margin come from the dual program over
// those points alone; failing that, the simplex solves from scratch.
inline HingeSolution solve_descent(const HingeProblem& prob, std::span<const double> hint = {},
                                   const Options& options = {}) {
  if (!hint.empty() && hint.size() != prob.dims)
    throw std::invalid_argument("hint length differs from the problem dimension");
  detail::VertexDescent walk(prob);
  std::size_t steps = 0;
  auto certified = [](const HingeSolution& s) {
    return s.objective - s.dual_bound <= kCertificateTolerance * (1.0 + std::abs(s.objective));
  };
  if (walk.run(hint, 50 * (prob.dims + 10) + prob.points())) {
    HingeSolution sol = walk.solution();
    if (certified(sol)) return sol;
    steps = sol.iterations;
    std::vector<std::size_t> tight;
    std::vector<std::size_t> active;
    walk.split(tight, active);
    try {
      const HingeSolution local = detail::dual_simplex(prob, tight, active, options);
      steps += local.iterations;
      if (local.objective < sol.objective) {
        sol.theta = local.theta;
        sol.objective = local.objective;
      }
      sol.dual_bound = std::max(sol.dual_bound, local.dual_bound);
      sol.iterations = steps;
      if (certified(sol)) return sol;
    } catch (const SolverError&) {
    }
  }
  HingeSolution full = solve_simplex(prob, options);
  full.iterations += steps;
  return full;
}

// Mehrotra predictor-corrector on the inequality form. Rows of the
// constraint system are: margins (a_p' theta + eps_p >= 1), eps_p >= 0,
// theta >= lo and -theta >= -hi; each row carries a slack and a dual.
// Iteration stops on a certified gap, on small residuals, or once the
// primal objective stalls near convergence; without a certificate vertex
// descent from the last iterate finishes the solve.
inline HingeSolution solve_interior_point(const HingeProblem& prob,
                                          const InteriorPointOptions& opt = {}) {
  const std::size_t r = prob.dims;
  const std::size_t n = prob.points();
  if (r == 0) throw SolverError("hinge problem without variables");

  std::vector<double> theta(r);
  for (std::size_t k = 0; k < r; ++k) {
    const double lo = prob.lower[k];
    const double hi = prob.upper[k];
    // Start one unit inside the tighter side of each box.
    theta[k] = hi - lo > 2.0 ? std::clamp(0.0, lo + 1.0, hi - 1.0) : 0.5 * (lo + hi);
  }
  std::vector<double> eps(n, 1.0);

  // Slacks and duals per row block.
  std::vector<double> s_m(n), s_e(n, 1.0), s_lo(r), s_hi(r);
  std::vector<double> y_m(n, 1.0), y_e(n, 1.0), y_lo(r), y_hi(r);
  for (std::size_t p = 0; p < n; ++p)
    s_m[p] = std::max(1.0, prob.margin(p, theta) + eps[p] - 1.0);
  for (std::size_t k = 0; k < r; ++k) {
    s_lo[k] = theta[k] - prob.lower[k];
    s_hi[k] = prob.upper[k] - theta[k];
    y_lo[k] = 1.0 / s_lo[k];
    y_hi[k] = 1.0 / s_hi[k];
  }
  const double total_rows = static_cast<double>(2 * n + 2 * r);

  // Residuals.
  std::vector<double> rp_m(n), rp_e(n), rp_lo(r), rp_hi(r), rd_t(r), rd_e(n);
  // Newton directions.
  std::vector<double> dth(r), deps(n);
  std::vector<double> ds_m(n), ds_e(n), ds_lo(r), ds_hi(r);
  std::vector<double> dy_m(n), dy_e(n), dy_lo(r), dy_hi(r);
  std::vector<double> rc_m(n), rc_e(n), rc_lo(r), rc_hi(r);
  std::vector<double> kmat(r * r);
  std::vector<double> rhs(r);

  auto newton = [&]() {
    // rho = r_d - G'(W r_p + S^-1 r_c); the reduced system eliminates eps.
    std::fill(kmat.begin(), kmat.end(), 0.0);
    for (std::size_t k = 0; k < r; ++k) {
      rhs[k] = rd_t[k] - ((y_lo[k] / s_lo[k]) * rp_lo[k] + rc_lo[k] / s_lo[k]) +
               ((y_hi[k] / s_hi[k]) * rp_hi[k] + rc_hi[k] / s_hi[k]);
      kmat[k * r + k] += y_lo[k] / s_lo[k] + y_hi[k] / s_hi[k];
    }
    std::vector<double>& rho_e = deps;  // reuse storage
    for (std::size_t p = 0; p < n; ++p) {
      const double w1 = y_m[p] / s_m[p];
      const double w2 = y_e[p] / s_e[p];
      const double v1 = w1 * rp_m[p] + rc_m[p] / s_m[p];
      const double v2 = w2 * rp_e[p] + rc_e[p] / s_e[p];
      rho_e[p] = rd_e[p] - (v1 + v2);
      const double denom = w1 + w2;
      const double coef = v1 + w1 * rho_e[p] / denom;  // v1 + w1 rho_e / (w1+w2)
      const double kw = w1 * w2 / denom;
      const double* a = prob.rows.data() + p * r;
      for (std::size_t i = 0; i < r; ++i) {
        rhs[i] -= coef * a[i];
        const double ai = kw * a[i];
        for (std::size_t j = 0; j <= i; ++j) kmat[i * r + j] += ai * a[j];
      }
    }
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = i + 1; j < r; ++j) kmat[i * r + j] = kmat[j * r + i];
    dth = rhs;
    if (!detail::cholesky_solve(kmat, dth, r)) throw SolverError("interior point: singular Newton system");

    for (std::size_t p = 0; p < n; ++p) {
      const double w1 = y_m[p] / s_m[p];
      const double w2 = y_e[p] / s_e[p];
      const double* a = prob.rows.data() + p * r;
      double adth = 0.0;
      for (std::size_t k = 0; k < r; ++k) adth += a[k] * dth[k];
      const double de = (rho_e[p] - w1 * adth) / (w1 + w2);
      deps[p] = de;
      const double g_m = adth + de;  // G dz on the margin row
      dy_m[p] = -w1 * (rp_m[p] + g_m) - rc_m[p] / s_m[p];
      ds_m[p] = -(rc_m[p] + s_m[p] * dy_m[p]) / y_m[p];
      dy_e[p] = -w2 * (rp_e[p] + de) - rc_e[p] / s_e[p];
      ds_e[p] = -(rc_e[p] + s_e[p] * dy_e[p]) / y_e[p];
    }
    for (std::size_t k = 0; k < r; ++k) {
      dy_lo[k] = -(y_lo[k] / s_lo[k]) * (rp_lo[k] + dth[k]) - rc_lo[k] / s_lo[k];
      ds_lo[k] = -(rc_lo[k] + s_lo[k] * dy_lo[k]) / y_lo[k];
      dy_hi[k] = -(y_hi[k] / s_hi[k]) * (rp_hi[k] - dth[k]) - rc_hi[k] / s_hi[k];
      ds_hi[k] = -(rc_hi[k] + s_hi[k] * dy_hi[k]) / y_hi[k];
    }
  };

  auto max_step = [](const std::vector<double>& v, const std::vector<double>& dv, double cap) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (dv[i] < 0.0) cap = std::min(cap, -v[i] / dv[i]);
    return cap;
  };

  HingeSolution out;
  std::vector<double> best_theta = theta;
  double best_objective = prob.objective(theta);
  double best_bound = -kInfinity;
  std::vector<double> g_work;
  std::vector<double> clamped(r);
  auto gap_ok = [&](double tol) {
    return best_objective - best_bound <= tol * (1.0 + std::abs(best_objective));
  };

  double cmax = 1.0;
  for (double c : prob.weights) cmax = std::max(cmax, c);
  std::size_t since_improvement = 0;

  std::size_t iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    for (std::size_t k = 0; k < r; ++k)
      clamped[k] = std::clamp(theta[k], prob.lower[k], prob.upper[k]);
    const double current = prob.objective(clamped);
    const bool improved = current < best_objective - 1e-12 * (1.0 + std::abs(best_objective));
    if (current < best_objective) {
      best_objective = current;
      best_theta = clamped;
    }
    best_bound = std::max(best_bound, detail::dual_bound(prob, y_m, g_work));
    if (gap_ok(opt.tolerance)) break;

    double pobj = 0.0;
    double dobj = 0.0;
    double rp_norm = 0.0;
    double rd_norm = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      rp_m[p] = prob.margin(p, theta) + eps[p] - 1.0 - s_m[p];
      rp_e[p] = eps[p] - s_e[p];
      rd_e[p] = y_m[p] + y_e[p] - prob.weights[p];
      pobj += prob.weights[p] * eps[p];
      dobj += y_m[p];
      rp_norm = std::max({rp_norm, std::abs(rp_m[p]), std::abs(rp_e[p])});
      rd_norm = std::max(rd_norm, std::abs(rd_e[p]) / cmax);
    }
    for (std::size_t k = 0; k < r; ++k) {
      double g = y_lo[k] - y_hi[k];
      for (std::size_t p = 0; p < n; ++p) g += y_m[p] * prob.rows[p * r + k];
      rd_t[k] = g;
      rp_lo[k] = theta[k] - prob.lower[k] - s_lo[k];
      rp_hi[k] = prob.upper[k] - theta[k] - s_hi[k];
      dobj += prob.lower[k] * y_lo[k] - prob.upper[k] * y_hi[k];
      rp_norm = std::max({rp_norm, std::abs(rp_lo[k]) / (1.0 + std::abs(prob.lower[k])),
                          std::abs(rp_hi[k]) / (1.0 + std::abs(prob.upper[k]))});
      rd_norm = std::max(rd_norm, std::abs(g) / cmax);
    }
    const double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    if (rp_norm <= opt.tolerance && rd_norm <= opt.tolerance && rel_gap <= opt.tolerance) break;
    double comp = 0.0;
    for (std::size_t p = 0; p < n; ++p) comp += s_m[p] * y_m[p] + s_e[p] * y_e[p];
    for (std::size_t k = 0; k < r; ++k) comp += s_lo[k] * y_lo[k] + s_hi[k] * y_hi[k];
    const double mu = comp / total_rows;
    if (!(mu > 1e-300)) break;
    // Near convergence the dual iterates can wander while the primal no
    // longer moves; the crossover below is cheaper than waiting.
    if (improved || comp > 1e-3 * (1.0 + std::abs(pobj))) {
      since_improvement = 0;
    } else if (++since_improvement >= opt.stall_iterations) {
      break;
    }

    try {
      // Predictor.
      for (std::size_t p = 0; p < n; ++p) {
        rc_m[p] = s_m[p] * y_m[p];
        rc_e[p] = s_e[p] * y_e[p];
      }
      for (std::size_t k = 0; k < r; ++k) {
        rc_lo[k] = s_lo[k] * y_lo[k];
        rc_hi[k] = s_hi[k] * y_hi[k];
      }
      newton();
    } catch (const SolverError&) {
      break;
    }
    double ap = max_step(s_m, ds_m, 1.0);
    ap = max_step(s_e, ds_e, ap);
    ap = max_step(s_lo, ds_lo, ap);
    ap = max_step(s_hi, ds_hi, ap);
    double ad = max_step(y_m, dy_m, 1.0);
    ad = max_step(y_e, dy_e, ad);
    ad = max_step(y_lo, dy_lo, ad);
    ad = max_step(y_hi, dy_hi, ad);
    double comp_aff = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      comp_aff += (s_m[p] + ap * ds_m[p]) * (y_m[p] + ad * dy_m[p]);
      comp_aff += (s_e[p] + ap * ds_e[p]) * (y_e[p] + ad * dy_e[p]);
    }
    for (std::size_t k = 0; k < r; ++k) {
      comp_aff += (s_lo[k] + ap * ds_lo[k]) * (y_lo[k] + ad * dy_lo[k]);
      comp_aff += (s_hi[k] + ap * ds_hi[k]) * (y_hi[k] + ad * dy_hi[k]);
    }
    const double mu_aff = comp_aff / total_rows;
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

    try {
      // Corrector.
      for (std::size_t p = 0; p < n; ++p) {
        rc_m[p] = s_m[p] * y_m[p] + ds_m[p] * dy_m[p] - sigma * mu;
        rc_e[p] = s_e[p] * y_e[p] + ds_e[p] * dy_e[p] - sigma * mu;
      }
      for (std::size_t k = 0; k < r; ++k) {
        rc_lo[k] = s_lo[k] * y_lo[k] + ds_lo[k] * dy_lo[k] - sigma * mu;
        rc_hi[k] = s_hi[k] * y_hi[k] + ds_hi[k] * dy_hi[k] - sigma * mu;
      }
      newton();
    } catch (const SolverError&) {
      break;
    }
    ap = max_step(s_m, ds_m, 1.0 / opt.step_fraction);
    ap = max_step(s_e, ds_e, ap);
    ap = max_step(s_lo, ds_lo, ap);
    ap = max_step(s_hi, ds_hi, ap);
    ad = max_step(y_m, dy_m, 1.0 / opt.step_fraction);
    ad = max_step(y_e, dy_e, ad);
    ad = max_step(y_lo, dy_lo, ad);
    ad = max_step(y_hi, dy_hi, ad);
    ap = std::min(1.0, opt.step_fraction * ap);
    ad = std::min(1.0, opt.step_fraction * ad);

    for (std::size_t k = 0; k < r; ++k) {
      theta[k] += ap * dth[k];
      s_lo[k] += ap * ds_lo[k];
      s_hi[k] += ap * ds_hi[k];
      y_lo[k] += ad * dy_lo[k];
      y_hi[k] += ad * dy_hi[k];
    }
    for (std::size_t p = 0; p < n; ++p) {
      eps[p] += ap * deps[p];
      s_m[p] += ap * ds_m[p];
      s_e[p] += ap * ds_e[p];
      y_m[p] += ad * dy_m[p];
      y_e[p] += ad * dy_e[p];
    }
  }

  out.theta = std::move(best_theta);
  out.objective = best_objective;
  out.dual_bound = best_bound;
  out.iterations = iter;
  if (gap_ok(opt.tolerance)) return out;

  // Crossover from the best interior iterate.
  HingeSolution vertex = solve_descent(prob, out.theta);
  vertex.iterations += iter;
  if (out.objective < vertex.objective) {
    vertex.theta = std::move(out.theta);
    vertex.objective = out.objective;
  }
  return vertex;
}

}  // namespace anopack::lp

#endif  // ANOPACK_HINGE_LP_HPP_
