/*
 * Copyright 2026 the wpbc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "wpbc/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace wpbc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense tableau over columns [structural | slack | artificial | rhs].
// All constraints are equalities A y + I s = b with y, s >= 0 after the
// lower-bound shift; rows with negative rhs are negated and given an
// artificial variable for phase 1.
struct Tableau {
  Eigen::MatrixXd t;        // m rows
  Eigen::VectorXd obj;      // reduced-cost row over all columns
  std::vector<int> basis;   // basic column per row
  int n_struct = 0;
  int n_slack = 0;
  int n_art = 0;
  int pivots = 0;

  int cols() const { return n_struct + n_slack + n_art; }
  int rhs_col() const { return cols(); }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int i = 0; i < t.rows(); ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(row);
    }
    const double f = obj(col);
    if (f != 0.0) obj -= f * t.row(row);
    basis[static_cast<std::size_t>(row)] = col;
    ++pivots;
  }

  // Bland: entering = lowest-index column with negative reduced cost,
  // leaving = min ratio with lowest basic index on ties.
  enum class Step { moved, optimal, unbounded };
  Step step(double tol, bool allow_artificial_enter) {
    int enter = -1;
    for (int j = 0; j < cols(); ++j) {
      if (!allow_artificial_enter && j >= n_struct + n_slack) continue;
      if (obj(j) < -tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return Step::optimal;

    int leave = -1;
    double best_ratio = kInf;
    for (int i = 0; i < t.rows(); ++i) {
      const double a = t(i, enter);
      if (a <= tol) continue;
      const double ratio = t(i, rhs_col()) / a;
      if (ratio < best_ratio - 1e-15 ||
          (std::abs(ratio - best_ratio) <= 1e-15 && leave >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave < 0) return Step::unbounded;
    pivot(leave, enter);
    return Step::moved;
  }
};

}  // namespace

LpResult solve_lp(const LpProblem& problem, const SolverOptions& opts) {
  const int n = static_cast<int>(problem.c.size());
  const int m_user = static_cast<int>(problem.b.size());
  if (problem.a.rows() != m_user || (m_user > 0 && problem.a.cols() != n))
    throw std::invalid_argument("solve_lp: constraint matrix dimensions mismatch");
  if (problem.lower.size() != n || problem.upper.size() != n)
    throw std::invalid_argument("solve_lp: bound vector dimensions mismatch");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(problem.lower(j)))
      throw std::invalid_argument("solve_lp: lower bounds must be finite");
    if (problem.lower(j) > problem.upper(j)) {
      LpResult r;
      r.status = LpStatus::infeasible;
      return r;
    }
  }

  // Shift to y = x - lower >= 0 and append finite upper bounds as rows.
  std::vector<int> upper_rows;
  for (int j = 0; j < n; ++j)
    if (std::isfinite(problem.upper(j))) upper_rows.push_back(j);

  const int m = m_user + static_cast<int>(upper_rows.size());
  Eigen::MatrixXd a(m, n);
  Eigen::VectorXd b(m);
  if (m_user > 0) {
    a.topRows(m_user) = problem.a;
    b.head(m_user) = problem.b - problem.a * problem.lower;
  }
  for (std::size_t r = 0; r < upper_rows.size(); ++r) {
    a.row(m_user + static_cast<int>(r)).setZero();
    a(m_user + static_cast<int>(r), upper_rows[r]) = 1.0;
    b(m_user + static_cast<int>(r)) = problem.upper(upper_rows[r]) - problem.lower(upper_rows[r]);
  }

  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i)
    if (b(i) < 0.0) art_rows.push_back(i);

  Tableau tab;
  tab.n_struct = n;
  tab.n_slack = m;
  tab.n_art = static_cast<int>(art_rows.size());
  tab.t.setZero(m, tab.cols() + 1);
  tab.basis.assign(static_cast<std::size_t>(m), -1);

  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    tab.t.block(i, 0, 1, n) = sign * a.row(i);
    tab.t(i, n + i) = sign;  // slack
    tab.t(i, tab.rhs_col()) = sign * b(i);
    if (b(i) < 0.0) {
      const int col = n + m + art;
      tab.t(i, col) = 1.0;
      tab.basis[static_cast<std::size_t>(i)] = col;
      ++art;
    } else {
      tab.basis[static_cast<std::size_t>(i)] = n + i;
    }
  }

  const double tol = opts.pivot_tol;
  const int max_pivots = std::max(2000, 200 * (m + n));
  LpResult result;

  // Phase 1: drive the artificial variables to zero.
  if (tab.n_art > 0) {
    tab.obj.setZero(tab.cols() + 1);
    for (int j = n + m; j < tab.cols(); ++j) tab.obj(j) = 1.0;
    for (int i = 0; i < m; ++i)
      if (tab.basis[static_cast<std::size_t>(i)] >= n + m) tab.obj -= tab.t.row(i);

    while (true) {
      if (tab.pivots > max_pivots) throw std::runtime_error("solve_lp: pivot budget exhausted");
      const auto s = tab.step(tol, true);
      if (s == Tableau::Step::optimal) break;
      if (s == Tableau::Step::unbounded)
        throw std::runtime_error("solve_lp: phase-1 unbounded (internal error)");
    }

    double w = 0.0;
    for (int i = 0; i < m; ++i)
      if (tab.basis[static_cast<std::size_t>(i)] >= n + m) w += tab.t(i, tab.rhs_col());
    if (w > 1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) {
      result.status = LpStatus::infeasible;
      result.pivots = tab.pivots;
      return result;
    }

    // Pivot any artificial still basic at level zero out of the basis.
    for (int i = 0; i < m; ++i) {
      if (tab.basis[static_cast<std::size_t>(i)] < n + m) continue;
      int col = -1;
      for (int j = 0; j < n + m; ++j)
        if (std::abs(tab.t(i, j)) > tol) {
          col = j;
          break;
        }
      if (col >= 0) tab.pivot(i, col);
      // A fully zero row is redundant; the artificial stays basic at zero
      // and is excluded from entering below.
    }
  }

  // Phase 2 reduced costs for the true objective.
  tab.obj.setZero(tab.cols() + 1);
  tab.obj.head(n) = problem.c;
  for (int i = 0; i < m; ++i) {
    const int bj = tab.basis[static_cast<std::size_t>(i)];
    if (bj < n && problem.c(bj) != 0.0) tab.obj -= problem.c(bj) * tab.t.row(i);
  }

  while (true) {
    if (tab.pivots > max_pivots) throw std::runtime_error("solve_lp: pivot budget exhausted");
    const auto s = tab.step(tol, false);
    if (s == Tableau::Step::optimal) break;
    if (s == Tableau::Step::unbounded) {
      result.status = LpStatus::unbounded;
      result.pivots = tab.pivots;
      return result;
    }
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int bj = tab.basis[static_cast<std::size_t>(i)];
    if (bj < n) y(bj) = tab.t(i, tab.rhs_col());
  }
  result.status = LpStatus::optimal;
  result.x = y + problem.lower;
  result.objective = problem.c.dot(result.x);
  result.pivots = tab.pivots;
  return result;
}

}  // namespace wpbc
