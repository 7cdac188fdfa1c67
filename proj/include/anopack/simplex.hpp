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

// Dense bounded-variable revised primal simplex for
//
//   min c'x  s.t.  A x = b,  lower <= x <= upper
//
// with few rows and many columns. The caller supplies a primal feasible
// starting basis; the explicit basis inverse is updated by elementary row
// operations and refactored periodically. Harris' two-pass ratio test keeps
// pivots well conditioned; Bland's rule takes over after a run of
// degenerate steps.

#ifndef ANOPACK_SIMPLEX_HPP_
#define ANOPACK_SIMPLEX_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "anopack/common.hpp"

namespace anopack::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Problem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;  // column-major, rows * cols
  std::vector<double> rhs;
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;

  const double* column(std::size_t j) const { return matrix.data() + j * rows; }
};

enum class VarState : unsigned char { kBasic, kAtLower, kAtUpper };

struct Start {
  std::vector<std::size_t> basis;  // one column per row
  std::vector<VarState> state;     // per column; basic entries are ignored
};

struct Solution {
  std::vector<double> x;
  std::vector<double> duals;  // simplex multipliers, c_B' B^-1
  std::vector<VarState> state;
  double objective = 0.0;
  std::size_t iterations = 0;
};

struct Options {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  std::size_t refactor_every = 64;
  std::size_t degenerate_before_bland = 40;
  std::size_t max_iterations = 0;  // 0: derived from problem size
};

namespace detail {

// In-place Gauss-Jordan inverse with partial pivoting of an r x r row-major
// matrix. Returns false when singular.
inline bool invert(std::vector<double>& a, std::size_t r) {
  std::vector<double> inv(r * r, 0.0);
  for (std::size_t i = 0; i < r; ++i) inv[i * r + i] = 1.0;
  for (std::size_t col = 0; col < r; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < r; ++i)
      if (std::abs(a[i * r + col]) > std::abs(a[piv * r + col])) piv = i;
    if (std::abs(a[piv * r + col]) < 1e-13) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < r; ++k) {
        std::swap(a[piv * r + k], a[col * r + k]);
        std::swap(inv[piv * r + k], inv[col * r + k]);
      }
    }
    const double p = a[col * r + col];
    for (std::size_t k = 0; k < r; ++k) {
      a[col * r + k] /= p;
      inv[col * r + k] /= p;
    }
    for (std::size_t i = 0; i < r; ++i) {
      if (i == col) continue;
      const double f = a[i * r + col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < r; ++k) {
        a[i * r + k] -= f * a[col * r + k];
        inv[i * r + k] -= f * inv[col * r + k];
      }
    }
  }
  a = std::move(inv);
  return true;
}

}  // namespace detail

class Solver {
 public:
  Solver(const Problem& problem, Options options = {})
      : p_(problem), opt_(options), r_(problem.rows), n_(problem.cols) {}

  Solution solve(const Start& start) {
    if (start.basis.size() != r_ || start.state.size() != n_)
      throw SolverError("simplex start has the wrong shape");
    basis_ = start.basis;
    state_ = start.state;
    x_.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == VarState::kAtUpper) {
        if (!std::isfinite(p_.upper[j])) throw SolverError("nonbasic variable at infinite bound");
        x_[j] = p_.upper[j];
      } else {
        state_[j] = VarState::kAtLower;
        x_[j] = p_.lower[j];
      }
    }
    for (std::size_t b : basis_) state_[b] = VarState::kBasic;
    refactor();
    for (std::size_t i = 0; i < r_; ++i) {
      const std::size_t j = basis_[i];
      if (x_[j] < p_.lower[j] - 1e-7 || x_[j] > p_.upper[j] + 1e-7)
        throw SolverError("simplex start basis is not primal feasible");
    }

    const std::size_t limit =
        opt_.max_iterations != 0 ? opt_.max_iterations : 200 * (n_ + r_) + 10000;
    std::vector<double> pi(r_);
    std::vector<double> alpha(r_);
    std::size_t degenerate_run = 0;
    std::size_t since_refactor = 0;
    std::size_t iter = 0;
    for (;; ++iter) {
      if (iter >= limit) throw SolverError("simplex iteration limit reached");
      compute_duals(pi);

      const bool bland = degenerate_run >= opt_.degenerate_before_bland;
      std::size_t entering = n_;
      double best = 0.0;
      double entering_d = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (state_[j] == VarState::kBasic) continue;
        if (p_.lower[j] == p_.upper[j]) continue;
        const double* col = p_.column(j);
        double d = p_.cost[j];
        for (std::size_t k = 0; k < r_; ++k) d -= pi[k] * col[k];
        const double tol = opt_.dual_tolerance * (1.0 + 1e-3 * std::abs(p_.cost[j]));
        double gain = 0.0;
        if (state_[j] == VarState::kAtLower && d < -tol) gain = -d;
        if (state_[j] == VarState::kAtUpper && d > tol) gain = d;
        if (gain <= 0.0) continue;
        if (bland) {
          entering = j;
          entering_d = d;
          break;
        }
        if (gain > best) {
          best = gain;
          entering = j;
          entering_d = d;
        }
      }
      if (entering == n_) break;

      const double dir = entering_d < 0.0 ? 1.0 : -1.0;
      ftran(p_.column(entering), alpha);

      // Harris pass 1: largest step with bounds relaxed by the tolerance.
      const double tol = opt_.primal_tolerance;
      const double range = p_.upper[entering] - p_.lower[entering];
      double relaxed = kInfinity;
      for (std::size_t i = 0; i < r_; ++i) {
        const double rate = -dir * alpha[i];
        const std::size_t b = basis_[i];
        if (rate < -opt_.pivot_tolerance) {
          relaxed = std::min(relaxed, (x_[b] - p_.lower[b] + tol) / -rate);
        } else if (rate > opt_.pivot_tolerance && std::isfinite(p_.upper[b])) {
          relaxed = std::min(relaxed, (p_.upper[b] - x_[b] + tol) / rate);
        }
      }
      if (!std::isfinite(relaxed) && !std::isfinite(range))
        throw SolverError("linear program is unbounded");

      std::size_t leave = r_;
      double step = range;
      bool leave_to_upper = false;
      if (!(range <= relaxed)) {
        // Pass 2: among rows blocking within the relaxed step, take the
        // largest pivot.
        double best_pivot = 0.0;
        for (std::size_t i = 0; i < r_; ++i) {
          const double rate = -dir * alpha[i];
          const std::size_t b = basis_[i];
          double limit_i = kInfinity;
          bool to_upper = false;
          if (rate < -opt_.pivot_tolerance) {
            limit_i = (x_[b] - p_.lower[b]) / -rate;
          } else if (rate > opt_.pivot_tolerance && std::isfinite(p_.upper[b])) {
            limit_i = (p_.upper[b] - x_[b]) / rate;
            to_upper = true;
          } else {
            continue;
          }
          if (limit_i <= relaxed && std::abs(rate) > best_pivot) {
            best_pivot = std::abs(rate);
            leave = i;
            step = std::max(0.0, limit_i);
            leave_to_upper = to_upper;
          }
        }
      }

      degenerate_run = step <= tol ? degenerate_run + 1 : 0;

      x_[entering] += dir * step;
      for (std::size_t i = 0; i < r_; ++i) x_[basis_[i]] -= dir * step * alpha[i];

      if (leave == r_) {
        // Bound flip.
        state_[entering] =
            state_[entering] == VarState::kAtLower ? VarState::kAtUpper : VarState::kAtLower;
        x_[entering] = state_[entering] == VarState::kAtLower ? p_.lower[entering]
                                                              : p_.upper[entering];
        continue;
      }

      const std::size_t out = basis_[leave];
      state_[out] = leave_to_upper ? VarState::kAtUpper : VarState::kAtLower;
      x_[out] = leave_to_upper ? p_.upper[out] : p_.lower[out];
      basis_[leave] = entering;
      state_[entering] = VarState::kBasic;
      pivot(leave, alpha);
      if (++since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
    }

    refactor();
    Solution sol;
    sol.x = x_;
    sol.duals.resize(r_);
    compute_duals(sol.duals);
    sol.state = state_;
    sol.iterations = iter;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += p_.cost[j] * x_[j];
    return sol;
  }

 private:
  void compute_duals(std::vector<double>& pi) const {
    for (std::size_t k = 0; k < r_; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < r_; ++i) acc += p_.cost[basis_[i]] * binv_[i * r_ + k];
      pi[k] = acc;
    }
  }

  void ftran(const double* col, std::vector<double>& out) const {
    for (std::size_t i = 0; i < r_; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < r_; ++k) acc += binv_[i * r_ + k] * col[k];
      out[i] = acc;
    }
  }

  void pivot(std::size_t leave, const std::vector<double>& alpha) {
    const double p = alpha[leave];
    double* row_l = binv_.data() + leave * r_;
    for (std::size_t k = 0; k < r_; ++k) row_l[k] /= p;
    for (std::size_t i = 0; i < r_; ++i) {
      if (i == leave || alpha[i] == 0.0) continue;
      const double f = alpha[i];
      double* row_i = binv_.data() + i * r_;
      for (std::size_t k = 0; k < r_; ++k) row_i[k] -= f * row_l[k];
    }
  }

  // Rebuilds B^-1 from the basis columns and recomputes basic values.
  void refactor() {
    std::vector<double> b(r_ * r_);
    for (std::size_t i = 0; i < r_; ++i) {
      const double* col = p_.column(basis_[i]);
      for (std::size_t k = 0; k < r_; ++k) b[k * r_ + i] = col[k];
    }
    if (!detail::invert(b, r_)) throw SolverError("singular simplex basis");
    binv_ = std::move(b);

    std::vector<double> resid = p_.rhs;
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      const double* col = p_.column(j);
      for (std::size_t k = 0; k < r_; ++k) resid[k] -= col[k] * x_[j];
    }
    for (std::size_t i = 0; i < r_; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < r_; ++k) acc += binv_[i * r_ + k] * resid[k];
      x_[basis_[i]] = acc;
    }
  }

  const Problem& p_;
  Options opt_;
  std::size_t r_;
  std::size_t n_;
  std::vector<std::size_t> basis_;
  std::vector<VarState> state_;
  std::vector<double> x_;
  std::vector<double> binv_;
};

inline Solution solve(const Problem& problem, const Start& start, Options options = {}) {
  return Solver(problem, options).solve(start);
}

}  // namespace anopack::lp

#endif  // ANOPACK_SIMPLEX_HPP_
