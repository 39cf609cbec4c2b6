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
#include <vector>

#include "wpbc/convex.hpp"
#include "wpbc/lp.hpp"
#include "wpbc/model.hpp"
#include "wpbc/report.hpp"

namespace wpbc {

/// Iterate of the constant-power scheme. reflect_seconds holds the products
/// beta_k * tau_k (the fully-reflecting time share of each slot) and
/// expansion the current linearization points beta_k of the energy rows.
struct StaticIterate {
  double p = 0.0;
  double tau0 = 0.0;
  Eigen::VectorXd tau;
  Eigen::VectorXd reflect_seconds;  // 0 <= reflect_seconds_k <= tau_k
  Eigen::VectorXd expansion;        // in [0,1]
};

struct StaticOptions {
  double sca_tol = 1e-6;   // relative objective change per linearization round
  int sca_max_iterations = 20;
  double bcd_tol = 1e-5;   // relative change of (tau0, tau, reflect_seconds)
  int bcd_max_iterations = 20;
  SolverOptions inner{1e-10, 400, 1.0, 10.0, 1e-9};
};

/// Affine under-estimator of node k's harvested energy, expanded around the
/// reflection ratio y: the own-slot term is replaced by its tangent at y in
/// (reflect_seconds_k, tau_k), every other slot contributes at the full
/// beacon power. Coincides with total_harvested_energy when
/// reflect_seconds_k / tau_k == y, and never exceeds it.
double linearized_energy(std::size_t k, double y, const Eigen::VectorXd& reflect_seconds,
                         double tau0, const Eigen::VectorXd& tau, double p,
                         const NetworkInstance& inst);

struct StaticTimeResult {
  ConvexStatus status = ConvexStatus::infeasible;
  double tau0 = 0.0;
  Eigen::VectorXd tau;
  Eigen::VectorXd reflect_seconds;
  double objective = 0.0;
  std::vector<double> sca_trace;  // objective after each linearization round
  ConvexResult last;
};

/// Inner block of the coordinate descent: at fixed beacon power p, minimize
/// p * (total time) over the durations and the reflecting shares. Each
/// linearization round solves a smooth convex program; the objective is
/// non-increasing across rounds.
StaticTimeResult solve_time_subproblem(double p, const NetworkInstance& inst,
                                       const StaticIterate& init, const StaticOptions& opts = {});

struct StaticPowerResult {
  bool feasible = false;
  double p = 0.0;
};

/// Outer block: with the durations and reflection coefficients fixed, the
/// objective p * (total time) is increasing in p while every constraint
/// relaxes with p, so the optimum is the smallest feasible power. Found by
/// feasibility bisection on [0, p_max].
StaticPowerResult solve_power_subproblem(double tau0, const Eigen::VectorXd& tau,
                                         const Eigen::VectorXd& beta, const NetworkInstance& inst,
                                         const StaticOptions& opts = {});

/// Constant transmit power plan: block coordinate descent alternating the
/// time/reflection subproblem (convexified by successive linearization of
/// the energy rows) with the scalar power subproblem. Converges on the
/// time/reflection block; the power-range gate returns the zero sentinel on
/// infeasible instances.
SolveReport run_static(const NetworkInstance& inst, const StaticOptions& opts = {});

}  // namespace wpbc
