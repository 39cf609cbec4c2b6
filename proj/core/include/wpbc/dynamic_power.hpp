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
#include <array>
#include <utility>

#include "wpbc/lp.hpp"
#include "wpbc/model.hpp"
#include "wpbc/report.hpp"
#include "wpbc/solver_options.hpp"

namespace wpbc {

/// Lagrange multipliers of the per-slot power plan. alpha prices the energy
/// causality constraints, eps the throughput constraints, kappa the
/// reflected-share caps, omega the per-slot power caps (index 0 = charging
/// slot) and vartheta the block-time budget. All stay >= 0 by projection.
struct DualState {
  Eigen::VectorXd alpha;  // size K
  Eigen::VectorXd eps;    // size K
  Eigen::VectorXd kappa;  // size K
  Eigen::VectorXd omega;  // size K+1
  double vartheta = 0.0;
  std::array<double, 5> step{0, 0, 0, 0, 0};  // l1..l5 for the five families

  static DualState initial(std::size_t k);
  std::vector<double> flat() const;
};

/// Auxiliary per-slot energies: theta_i = p_i * tau_i and the reflected
/// share lambda_k = beta_k * theta_k.
struct PrimalIterate {
  Eigen::VectorXd theta;   // joules, size K+1, index 0 = charging slot
  Eigen::VectorXd lambda;  // joules, size K
  double tau0 = 0.0;
  Eigen::VectorXd tau;     // seconds, size K
};

/// Which way a multiplier moves when its constraint is violated. Standard
/// projected dual ascent increases it; the alternative direction is kept
/// selectable for A/B comparison.
enum class DualSign { increase_on_violation, decrease_on_violation };

struct DynamicOptions {
  double tolerance = 1e-4;  // max relative multiplier change for convergence
  int max_iterations = 200;
  double step_scale = 1.0;  // c0 of the diminishing schedule c0/sqrt(n+1)
  DualSign sign = DualSign::increase_on_violation;
  int polish_rounds = 2;        // dual-space coordinate refinement sweeps
  int boundary_iterations = 64; // feasibility-boundary bisection depth
  bool emit_trace = true;
  SolverOptions lp;
};

/// Sum over nodes of alpha_k * slope-at-the-node of the harvester input
/// curve, evaluated at beacon power x: sum_k alpha_k (a v - d) h_k /
/// (h_k x + v)^2. Strictly decreasing in x when any alpha_k > 0.
double weighted_harvest_slope(double x, const Eigen::VectorXd& alpha,
                              const NetworkInstance& inst);

/// Charging-slot power: the inverse of weighted_harvest_slope at 1+omega_0,
/// clamped to [0, p_max].
double recover_eh_slot_power(const DualState& duals, const NetworkInstance& inst);

/// Unreflected share of the slot-k beacon power,
/// [ sqrt(alpha_k (a v - d) h_k / (1+omega_k-kappa_k)) / h_k - v/h_k ]^+.
/// A nonpositive denominator is treated as an infinite argument and clamps
/// to p_max.
double recover_passive_power(std::size_t k, const DualState& duals,
                             const NetworkInstance& inst);

/// Reflected share of the slot-k beacon power,
/// [ eps_k W / (kappa_k + (1+omega_k-kappa_k) ln 2) - W N0 / (xi h_k g_k) ]^+.
double recover_reflected_power(std::size_t k, const DualState& duals,
                               const NetworkInstance& inst);

/// Slot power p_k = passive + reflected and the reflection coefficient
/// beta_k = reflected / p_k; returns the (0,0) sentinel when both shares
/// vanish.
std::pair<double, double> recover_slot_power_split(std::size_t k, const DualState& duals,
                                                   const NetworkInstance& inst);

struct TimeLpResult {
  LpStatus status = LpStatus::infeasible;
  double tau0 = 0.0;
  Eigen::VectorXd tau;
  double objective = 0.0;
};

/// At fixed powers and reflection coefficients the remaining problem in the
/// slot durations is linear: minimize the spent energy subject to the
/// per-node throughput lower bounds, the linear energy-causality rows and
/// the time budget.
TimeLpResult solve_time_allocation(double p0, const Eigen::VectorXd& p,
                                   const Eigen::VectorXd& beta, const NetworkInstance& inst,
                                   const SolverOptions& opts = {});

/// The five projected subgradient updates, applied with the step sizes in
/// state.step and projected onto >= 0.
DualState update_duals(const DualState& state, const PrimalIterate& primal,
                       const NetworkInstance& inst,
                       DualSign sign = DualSign::increase_on_violation);

// Partial Lagrangian of the transformed problem and its analytic partial
// derivatives. These include the cross-slot harvest terms for every node, so
// they match finite differences of lagrangian_value at any K.
double lagrangian_value(const PrimalIterate& primal, const DualState& duals,
                        const NetworkInstance& inst);
double lagrangian_d_theta(std::size_t i, const PrimalIterate& primal, const DualState& duals,
                          const NetworkInstance& inst);  // i = 0..K
double lagrangian_d_lambda(std::size_t k, const PrimalIterate& primal, const DualState& duals,
                           const NetworkInstance& inst);
double lagrangian_d_tau(std::size_t i, const PrimalIterate& primal, const DualState& duals,
                        const NetworkInstance& inst);  // i = 0..K

/// Per-slot transmit power plan: subgradient iterations on the dual problem
/// with closed-form power recovery and an LP time allocation per iterate,
/// followed by a dual-space refinement that pins the returned allocation to
/// the feasibility boundary (full block used, binding node exactly tight).
/// Infeasibility is reported through the all-zero sentinel allocation.
SolveReport run_dynamic(const NetworkInstance& inst, const DynamicOptions& opts = {});

}  // namespace wpbc
