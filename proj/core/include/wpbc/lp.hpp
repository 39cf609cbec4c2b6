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
#pragma once

#include <Eigen/Dense>

#include "wpbc/solver_options.hpp"

namespace wpbc {

/// min c'x  subject to  a*x <= b,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +infinity.
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  int pivots = 0;
};

/// Dense two-phase simplex with Bland's rule for anti-cycling. Sized for
/// small problems (tens of variables); no sparsity, no revised form.
/// Throws std::invalid_argument on dimension mismatches.
LpResult solve_lp(const LpProblem& problem, const SolverOptions& opts = {});

}  // namespace wpbc
