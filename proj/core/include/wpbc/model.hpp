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

#include <cstddef>
#include <vector>

namespace wpbc {

/// 10^((p_dbm - 30)/10). dBm appears only at configuration boundaries;
/// all internal computation is in linear SI units (W, s, Hz, bits, J).
double dbm_to_watts(double p_dbm);
double watts_to_dbm(double p_watts);

/// Non-linear energy-harvester curve y(x) = (a*x + d)/(x + v) - d/v for
/// input RF power x >= 0. Requires v > 0 and a*v - d > 0 so that the curve
/// is strictly increasing with a positive saturation limit (a*v - d)/v.
struct EhParams {
  double a;  // dimensionless
  double d;  // watts
  double v;  // watts

  EhParams(double a, double d, double v);

  /// Supremum of the harvested power, (a*v - d)/v.
  double saturation() const { return (a * v - d) / v; }
};

/// Per-node QoS and circuit parameters.
struct NodeParams {
  double r_min = 0.0;  // required throughput per block, bits
  double p_c = 0.0;    // circuit power, watts
};

/// Per-node power gains: h (beacon -> node) and g (node -> receiver).
struct ChannelState {
  std::vector<double> h;
  std::vector<double> g;
};

/// A complete problem instance in linear SI units.
struct NetworkInstance {
  std::vector<NodeParams> nodes;
  ChannelState channels;
  EhParams eh;
  double block_len;      // T, seconds
  double bandwidth;      // W, hertz
  double noise_density;  // N0, watts/hertz
  double p_max;          // watts
  double xi;             // backscatter-vs-Shannon gap, in (0,1)

  std::size_t size() const { return nodes.size(); }

  /// Throws std::invalid_argument when any invariant is violated
  /// (K >= 1, consistent sizes, positive gains, T/W/N0/p_max > 0, 0 < xi < 1).
  void validate() const;
};

/// A candidate solution: slot durations, reflection coefficients and beacon
/// transmit powers. Index 0 refers to the dedicated energy-harvesting slot.
/// For the static scheme every power entry holds the single shared value.
struct Allocation {
  double tau0 = 0.0;         // seconds
  std::vector<double> tau;   // seconds, size K
  std::vector<double> beta;  // in [0,1], size K
  double p0 = 0.0;           // watts
  std::vector<double> p;     // watts, size K

  /// All-zero sentinel returned when no feasible power exists.
  static Allocation zero(std::size_t k);

  double total_time() const;
};

/// Slack tolerances used by check_feasibility. Rate slack is relative to the
/// node requirement, energy slack is absolute joules.
struct FeasibilityTolerance {
  double rate_rel = 1e-6;
  double energy_abs = 1e-9;
  double time_rel = 1e-9;
  double power_abs = 1e-12;
  double beta_abs = 1e-12;
};

/// Signed slacks per constraint family; feasible iff every slack clears its
/// tolerance. Violations are reported as nonnegative magnitudes.
struct FeasibilityReport {
  std::vector<double> rate_slack;      // bits, R_k - r_min_k
  std::vector<double> energy_slack;    // joules, harvested_k - consumed_k
  double time_slack = 0.0;             // seconds, T - sum(tau)
  std::vector<double> power_violation; // watts, size K+1, index 0 = EH slot
  std::vector<double> beta_violation;  // distance outside [0,1]
  bool feasible = false;
};

/// Instantaneous harvested power (a*x + d)/(x + v) - d/v; zero at x = 0,
/// strictly increasing and strictly concave, saturating at eh.saturation().
double harvested_power(double x, const EhParams& eh);

/// d/dx of harvested_power: (a*v - d)/(x + v)^2 > 0.
double harvested_power_slope(double x, const EhParams& eh);

/// Backscatter-link throughput over a slot of length tau:
/// W * tau * log2(1 + xi*beta*p*h*g / (W*N0)), with the tau = 0 value
/// defined as the continuity limit 0.
double backscatter_throughput(double tau, double beta, double p, double h,
                              double g, const NetworkInstance& inst);

/// Total energy node k harvests over the block: own slot contributes at the
/// unreflected input (1-beta_k)*p_k*h_k, every other slot i at p_i*h_k.
double total_harvested_energy(const Allocation& alloc, std::size_t k,
                              const NetworkInstance& inst);

/// Beacon energy spent over the block, sum_i p_i * tau_i.
double pb_energy(const Allocation& alloc);

/// Evaluates all five constraint families (throughput, energy causality,
/// time budget, reflection range, power range) and reports slacks.
/// Power positivity is only enforced for slots with tau > 0; a zero-length
/// slot never transmits.
FeasibilityReport check_feasibility(const Allocation& alloc,
                                    const NetworkInstance& inst,
                                    const FeasibilityTolerance& tol = {});

}  // namespace wpbc
