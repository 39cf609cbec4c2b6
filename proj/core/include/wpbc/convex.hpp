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
#include <functional>
#include <optional>
#include <vector>

#include "wpbc/solver_options.hpp"

namespace wpbc {

/// Evaluator returning f(x); fills *grad with the analytic gradient when the
/// pointer is non-null. Must be finite on the open feasible box.
using GradFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

/// Smooth convex program: min objective(x) s.t. constraints[i](x) <= 0 and
/// lower <= x <= upper. All constraint functions must be convex with
/// gradients; +-infinity box entries are allowed. `start`, when present,
/// should be strictly feasible (it is verified and otherwise discarded).
struct SmoothConvexProgram {
  int n = 0;
  GradFn objective;
  std::vector<GradFn> constraints;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::optional<Eigen::VectorXd> start;
};

enum class ConvexStatus { optimal, infeasible, max_iterations };

struct ConvexResult {
  ConvexStatus status = ConvexStatus::max_iterations;
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd duals;          // barrier multipliers per constraint
  double kkt_stationarity = 0.0;  // inf-norm of the stationarity residual
  double kkt_complementarity = 0.0;
  double max_violation = 0.0;     // max(0, max_i g_i(x))
  int newton_steps = 0;
};

/// Primal log-barrier method with damped Newton inner iterations and
/// backtracking line search. Hessians are formed by central differences of
/// the analytic gradients, which is accurate and cheap at the problem sizes
/// this library targets (tens of variables). When no strictly feasible start
/// is supplied a phase-I subproblem (minimize the worst violation) runs
/// first; infeasibility is declared when its optimum exceeds +tolerance.
ConvexResult solve_smooth_convex(const SmoothConvexProgram& program,
                                 const SolverOptions& opts = {});

}  // namespace wpbc
