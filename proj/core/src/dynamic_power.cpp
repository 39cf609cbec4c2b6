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
#include "wpbc/dynamic_power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "wpbc/bisect.hpp"

namespace wpbc {
namespace {

constexpr double kLn2 = 0.6931471805599453;

// f5(z) - z f5'(z): the per-second harvest a slot contributes when its
// duration grows at a fixed beacon input power z.
double marginal_slot_harvest(double z, const EhParams& eh) {
  const double s = z + eh.v;
  return eh.a - eh.d / eh.v + (eh.d - eh.a * eh.v) * (2.0 * z + eh.v) / (s * s);
}

double rate_per_second(double u, double h, double g, const NetworkInstance& inst) {
  return inst.bandwidth *
         std::log2(1.0 + inst.xi * u * h * g / (inst.bandwidth * inst.noise_density));
}

}  // namespace

DualState DualState::initial(std::size_t k) {
  DualState d;
  d.alpha = Eigen::VectorXd::Ones(static_cast<int>(k));
  d.eps = Eigen::VectorXd::Ones(static_cast<int>(k));
  d.kappa = Eigen::VectorXd::Zero(static_cast<int>(k));
  d.omega = Eigen::VectorXd::Zero(static_cast<int>(k) + 1);
  d.vartheta = 0.0;
  return d;
}

std::vector<double> DualState::flat() const {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(alpha.size() + eps.size() + kappa.size() + omega.size()) + 1);
  for (int i = 0; i < alpha.size(); ++i) v.push_back(alpha(i));
  for (int i = 0; i < eps.size(); ++i) v.push_back(eps(i));
  for (int i = 0; i < kappa.size(); ++i) v.push_back(kappa(i));
  for (int i = 0; i < omega.size(); ++i) v.push_back(omega(i));
  v.push_back(vartheta);
  return v;
}

double weighted_harvest_slope(double x, const Eigen::VectorXd& alpha,
                              const NetworkInstance& inst) {
  const double avd = inst.eh.a * inst.eh.v - inst.eh.d;
  double sum = 0.0;
  for (int k = 0; k < alpha.size(); ++k) {
    const double hk = inst.channels.h[static_cast<std::size_t>(k)];
    const double s = hk * x + inst.eh.v;
    sum += alpha(k) * avd * hk / (s * s);
  }
  return sum;
}

double recover_eh_slot_power(const DualState& duals, const NetworkInstance& inst) {
  const double target = 1.0 + duals.omega(0);
  auto phi = [&](double x) { return weighted_harvest_slope(x, duals.alpha, inst); };
  return bisect_decreasing(phi, target, 0.0, inst.p_max, 1e-13 * inst.p_max);
}

double recover_passive_power(std::size_t k, const DualState& duals,
                             const NetworkInstance& inst) {
  const int ki = static_cast<int>(k);
  const double denom = 1.0 + duals.omega(ki + 1) - duals.kappa(ki);
  if (denom <= 0.0) return inst.p_max;  // infinite argument, clamp to the cap
  const double hk = inst.channels.h[k];
  const double avd = inst.eh.a * inst.eh.v - inst.eh.d;
  const double arg = duals.alpha(ki) * avd * hk / denom;
  return std::max(0.0, (std::sqrt(arg) - inst.eh.v) / hk);
}

double recover_reflected_power(std::size_t k, const DualState& duals,
                               const NetworkInstance& inst) {
  const int ki = static_cast<int>(k);
  const double denom =
      duals.kappa(ki) + (1.0 + duals.omega(ki + 1) - duals.kappa(ki)) * kLn2;
  const double hk = inst.channels.h[k];
  const double gk = inst.channels.g[k];
  const double val = duals.eps(ki) * inst.bandwidth / denom -
                     inst.bandwidth * inst.noise_density / (inst.xi * hk * gk);
  return std::max(0.0, val);
}

std::pair<double, double> recover_slot_power_split(std::size_t k, const DualState& duals,
                                                   const NetworkInstance& inst) {
  const double passive = recover_passive_power(k, duals, inst);
  const double reflected = recover_reflected_power(k, duals, inst);
  const double p = passive + reflected;
  if (p <= 0.0) return {0.0, 0.0};
  return {p, reflected / p};
}

TimeLpResult solve_time_allocation(double p0, const Eigen::VectorXd& p,
                                   const Eigen::VectorXd& beta, const NetworkInstance& inst,
                                   const SolverOptions& opts) {
  const int k = static_cast<int>(inst.size());
  TimeLpResult out;
  out.tau = Eigen::VectorXd::Zero(k);

  // Variables x = (tau0, tau_1..K).
  LpProblem lp;
  lp.c.resize(k + 1);
  lp.c(0) = p0;
  for (int i = 0; i < k; ++i) lp.c(i + 1) = p(i);
  lp.lower = Eigen::VectorXd::Zero(k + 1);
  lp.upper = Eigen::VectorXd::Constant(k + 1, std::numeric_limits<double>::infinity());

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;

  // Throughput lower bounds: the rate is linear in tau at fixed power and
  // reflection, so tau_k >= r_min / rate_per_second.
  for (int i = 0; i < k; ++i) {
    const double r_min = inst.nodes[static_cast<std::size_t>(i)].r_min;
    if (r_min <= 0.0) continue;
    const double rho = rate_per_second(beta(i) * p(i), inst.channels.h[static_cast<std::size_t>(i)],
                                       inst.channels.g[static_cast<std::size_t>(i)], inst);
    if (rho <= 0.0) {
      out.status = LpStatus::infeasible;
      return out;
    }
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(k + 1);
    row(i + 1) = -rho;
    rows.push_back(row);
    rhs.push_back(-r_min);
  }

  // Energy causality, linear in the durations at fixed powers.
  for (int i = 0; i < k; ++i) {
    const double hk = inst.channels.h[static_cast<std::size_t>(i)];
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(k + 1);
    row(0) = -harvested_power(p0 * hk, inst.eh);
    for (int j = 0; j < k; ++j) {
      if (j == i)
        row(j + 1) = inst.nodes[static_cast<std::size_t>(i)].p_c -
                     harvested_power((1.0 - beta(i)) * p(i) * hk, inst.eh);
      else
        row(j + 1) = -harvested_power(p(j) * hk, inst.eh);
    }
    rows.push_back(row);
    rhs.push_back(0.0);
  }

  // Time budget.
  rows.push_back(Eigen::RowVectorXd::Ones(k + 1));
  rhs.push_back(inst.block_len);

  lp.a.resize(static_cast<int>(rows.size()), k + 1);
  lp.b.resize(static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    lp.a.row(static_cast<int>(r)) = rows[r];
    lp.b(static_cast<int>(r)) = rhs[r];
  }

  const LpResult res = solve_lp(lp, opts);
  out.status = res.status;
  if (res.status == LpStatus::optimal) {
    out.tau0 = std::max(0.0, res.x(0));
    for (int i = 0; i < k; ++i) out.tau(i) = std::max(0.0, res.x(i + 1));
    out.objective = res.objective;
  }
  return out;
}

namespace {

// Harvested energy of node k at a primal iterate expressed through the
// auxiliary per-slot energies.
double harvested_energy_at(const PrimalIterate& pr, std::size_t k, const NetworkInstance& inst) {
  const int ki = static_cast<int>(k);
  const double hk = inst.channels.h[k];
  double e = 0.0;
  if (pr.tau(ki) > 0.0)
    e += harvested_power((pr.theta(ki + 1) - pr.lambda(ki)) / pr.tau(ki) * hk, inst.eh) *
         pr.tau(ki);
  if (pr.tau0 > 0.0) e += harvested_power(pr.theta(0) / pr.tau0 * hk, inst.eh) * pr.tau0;
  for (int j = 0; j < pr.tau.size(); ++j) {
    if (j == ki || pr.tau(j) <= 0.0) continue;
    e += harvested_power(pr.theta(j + 1) / pr.tau(j) * hk, inst.eh) * pr.tau(j);
  }
  return e;
}

double throughput_at(const PrimalIterate& pr, std::size_t k, const NetworkInstance& inst) {
  const int ki = static_cast<int>(k);
  if (pr.tau(ki) <= 0.0) return 0.0;
  const double hk = inst.channels.h[k];
  const double gk = inst.channels.g[k];
  return inst.bandwidth * pr.tau(ki) *
         std::log2(1.0 + inst.xi * hk * gk * pr.lambda(ki) /
                             (pr.tau(ki) * inst.bandwidth * inst.noise_density));
}

}  // namespace

DualState update_duals(const DualState& state, const PrimalIterate& primal,
                       const NetworkInstance& inst, DualSign sign) {
  const int k = static_cast<int>(inst.size());
  const double dir = sign == DualSign::increase_on_violation ? 1.0 : -1.0;
  DualState next = state;

  for (int i = 0; i < k; ++i) {
    const double consumed = inst.nodes[static_cast<std::size_t>(i)].p_c * primal.tau(i);
    const double g_energy = consumed - harvested_energy_at(primal, static_cast<std::size_t>(i), inst);
    next.alpha(i) = std::max(0.0, state.alpha(i) + dir * state.step[0] * g_energy);

    const double g_rate = inst.nodes[static_cast<std::size_t>(i)].r_min -
                          throughput_at(primal, static_cast<std::size_t>(i), inst);
    next.eps(i) = std::max(0.0, state.eps(i) + dir * state.step[1] * g_rate);

    const double g_share = primal.lambda(i) - primal.theta(i + 1);
    next.kappa(i) = std::max(0.0, state.kappa(i) + dir * state.step[4] * g_share);
  }

  const double g_cap0 = primal.theta(0) - inst.p_max * primal.tau0;
  next.omega(0) = std::max(0.0, state.omega(0) + dir * state.step[2] * g_cap0);
  for (int i = 0; i < k; ++i) {
    const double g_cap = primal.theta(i + 1) - inst.p_max * primal.tau(i);
    next.omega(i + 1) = std::max(0.0, state.omega(i + 1) + dir * state.step[2] * g_cap);
  }

  double total_time = primal.tau0;
  for (int i = 0; i < k; ++i) total_time += primal.tau(i);
  next.vartheta =
      std::max(0.0, state.vartheta + dir * state.step[3] * (total_time - inst.block_len));

  return next;
}

double lagrangian_value(const PrimalIterate& pr, const DualState& duals,
                        const NetworkInstance& inst) {
  const int k = static_cast<int>(inst.size());
  double total_time = pr.tau0;
  double lag = pr.theta.sum();
  for (int i = 0; i < k; ++i) {
    total_time += pr.tau(i);
    lag += duals.alpha(i) * (inst.nodes[static_cast<std::size_t>(i)].p_c * pr.tau(i) -
                             harvested_energy_at(pr, static_cast<std::size_t>(i), inst));
    lag += duals.eps(i) * (inst.nodes[static_cast<std::size_t>(i)].r_min -
                           throughput_at(pr, static_cast<std::size_t>(i), inst));
    lag += duals.kappa(i) * (pr.lambda(i) - pr.theta(i + 1));
    lag += duals.omega(i + 1) * (pr.theta(i + 1) - inst.p_max * pr.tau(i));
  }
  lag += duals.omega(0) * (pr.theta(0) - inst.p_max * pr.tau0);
  lag += duals.vartheta * (total_time - inst.block_len);
  return lag;
}

double lagrangian_d_theta(std::size_t i, const PrimalIterate& pr, const DualState& duals,
                          const NetworkInstance& inst) {
  const int k = static_cast<int>(inst.size());
  const double avd = inst.eh.a * inst.eh.v - inst.eh.d;
  if (i == 0) {
    const double x0 = pr.tau0 > 0.0 ? pr.theta(0) / pr.tau0 : 0.0;
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      const double hj = inst.channels.h[static_cast<std::size_t>(j)];
      const double s = x0 * hj + inst.eh.v;
      sum += duals.alpha(j) * avd * hj / (s * s);
    }
    return 1.0 - sum + duals.omega(0);
  }
  const int ki = static_cast<int>(i) - 1;
  const double tau_k = pr.tau(ki);
  const double own_x = tau_k > 0.0 ? (pr.theta(ki + 1) - pr.lambda(ki)) / tau_k : 0.0;
  const double full_x = tau_k > 0.0 ? pr.theta(ki + 1) / tau_k : 0.0;
  const double hk = inst.channels.h[static_cast<std::size_t>(ki)];
  const double s_own = own_x * hk + inst.eh.v;
  double val = 1.0 - duals.alpha(ki) * avd * hk / (s_own * s_own) - duals.kappa(ki) +
               duals.omega(ki + 1);
  // Cross-slot harvest: every other node also charges during this slot.
  for (int j = 0; j < k; ++j) {
    if (j == ki) continue;
    const double hj = inst.channels.h[static_cast<std::size_t>(j)];
    const double s = full_x * hj + inst.eh.v;
    val -= duals.alpha(j) * avd * hj / (s * s);
  }
  return val;
}

double lagrangian_d_lambda(std::size_t k, const PrimalIterate& pr, const DualState& duals,
                           const NetworkInstance& inst) {
  const int ki = static_cast<int>(k);
  const double avd = inst.eh.a * inst.eh.v - inst.eh.d;
  const double tau_k = pr.tau(ki);
  const double own_x = tau_k > 0.0 ? (pr.theta(ki + 1) - pr.lambda(ki)) / tau_k : 0.0;
  const double u = tau_k > 0.0 ? pr.lambda(ki) / tau_k : 0.0;
  const double hk = inst.channels.h[k];
  const double gk = inst.channels.g[k];
  const double s_own = own_x * hk + inst.eh.v;
  return duals.kappa(ki) + duals.alpha(ki) * avd * hk / (s_own * s_own) -
         duals.eps(ki) * inst.bandwidth * inst.xi * hk * gk /
             ((inst.bandwidth * inst.noise_density + inst.xi * hk * gk * u) * kLn2);
}

double lagrangian_d_tau(std::size_t i, const PrimalIterate& pr, const DualState& duals,
                        const NetworkInstance& inst) {
  const int k = static_cast<int>(inst.size());
  if (i == 0) {
    const double x0 = pr.tau0 > 0.0 ? pr.theta(0) / pr.tau0 : 0.0;
    double val = duals.vartheta - duals.omega(0) * inst.p_max;
    for (int j = 0; j < k; ++j)
      val -= duals.alpha(j) *
             marginal_slot_harvest(x0 * inst.channels.h[static_cast<std::size_t>(j)], inst.eh);
    return val;
  }
  const int ki = static_cast<int>(i) - 1;
  const double tau_k = pr.tau(ki);
  const double own_x = tau_k > 0.0 ? (pr.theta(ki + 1) - pr.lambda(ki)) / tau_k : 0.0;
  const double full_x = tau_k > 0.0 ? pr.theta(ki + 1) / tau_k : 0.0;
  const double u = tau_k > 0.0 ? pr.lambda(ki) / tau_k : 0.0;
  const double hk = inst.channels.h[static_cast<std::size_t>(ki)];
  const double gk = inst.channels.g[static_cast<std::size_t>(ki)];

  double val = duals.alpha(ki) * inst.nodes[static_cast<std::size_t>(ki)].p_c -
               duals.alpha(ki) * marginal_slot_harvest(own_x * hk, inst.eh) + duals.vartheta -
               duals.omega(ki + 1) * inst.p_max;
  for (int j = 0; j < k; ++j) {
    if (j == ki) continue;
    val -= duals.alpha(j) *
           marginal_slot_harvest(full_x * inst.channels.h[static_cast<std::size_t>(j)], inst.eh);
  }
  const double wn0 = inst.bandwidth * inst.noise_density;
  val -= duals.eps(ki) * inst.bandwidth * std::log2(1.0 + inst.xi * hk * gk * u / wn0);
  val += duals.eps(ki) * inst.bandwidth * inst.xi * hk * gk * u /
         ((wn0 + inst.xi * hk * gk * u) * kLn2);
  return val;
}

// ---------------------------------------------------------------------------
// run_dynamic

namespace {

struct RecoveredPowers {
  double p0 = 0.0;
  Eigen::VectorXd p;     // total slot power
  Eigen::VectorXd beta;  // reflected share
  Eigen::VectorXd passive;
  Eigen::VectorXd reflected;
};

// Closed-form recovery with the slot powers projected onto the cap, so the
// feasibility sweep below stays inside the power box.
RecoveredPowers recover_capped(const DualState& duals, const NetworkInstance& inst) {
  const int k = static_cast<int>(inst.size());
  RecoveredPowers r;
  r.p0 = recover_eh_slot_power(duals, inst);
  r.p.resize(k);
  r.beta.resize(k);
  r.passive.resize(k);
  r.reflected.resize(k);
  for (int i = 0; i < k; ++i) {
    const double u = std::min(recover_reflected_power(static_cast<std::size_t>(i), duals, inst),
                              inst.p_max);
    const double w = std::min(recover_passive_power(static_cast<std::size_t>(i), duals, inst),
                              inst.p_max - u);
    r.reflected(i) = u;
    r.passive(i) = w;
    r.p(i) = u + w;
    r.beta(i) = r.p(i) > 0.0 ? u / r.p(i) : 0.0;
  }
  return r;
}

DualState scaled_alpha(const DualState& duals, double s) {
  DualState d = duals;
  d.alpha *= s;
  return d;
}

struct BoundaryPoint {
  bool found = false;
  double scale = 1.0;
  RecoveredPowers powers;
  TimeLpResult lp;
};

// Scans the energy-side multiplier scale for the smallest s at which the
// time allocation stays feasible. Feasibility is monotone in s: larger
// alpha raises the charging and unreflected powers, which only relaxes the
// energy rows while the throughput rows do not move.
BoundaryPoint boundary_by_scale(const DualState& duals, const NetworkInstance& inst,
                                const DynamicOptions& opts, double bracket_hint,
                                int bisect_iterations) {
  BoundaryPoint out;
  auto eval = [&](double s) -> std::optional<std::pair<RecoveredPowers, TimeLpResult>> {
    const DualState d = scaled_alpha(duals, s);
    RecoveredPowers pw = recover_capped(d, inst);
    TimeLpResult lp = solve_time_allocation(pw.p0, pw.p, pw.beta, inst, opts.lp);
    if (lp.status != LpStatus::optimal) return std::nullopt;
    return std::make_pair(std::move(pw), std::move(lp));
  };

  double hi = bracket_hint > 0.0 ? bracket_hint : 1.0;
  auto at_hi = eval(hi);
  int guard = 0;
  while (!at_hi && guard++ < 80) {
    hi *= 4.0;
    at_hi = eval(hi);
    if (hi > 1e30) break;
  }
  if (!at_hi) return out;  // no feasible power plan at any scale

  double lo = hi;
  guard = 0;
  while (guard++ < 80) {
    const double cand = lo / 4.0;
    auto at_cand = eval(cand);
    if (!at_cand) {
      lo = cand;
      break;
    }
    lo = cand;
    hi = cand;
    at_hi = std::move(at_cand);
    if (lo < 1e-30) {
      // Feasible all the way down: energy rows never bind.
      out.found = true;
      out.scale = hi;
      out.powers = std::move(at_hi->first);
      out.lp = std::move(at_hi->second);
      return out;
    }
  }

  for (int it = 0; it < bisect_iterations; ++it) {
    const double mid = std::sqrt(lo * hi);
    auto at_mid = eval(mid);
    if (at_mid) {
      hi = mid;
      at_hi = std::move(at_mid);
    } else {
      lo = mid;
    }
  }
  out.found = true;
  out.scale = hi;
  out.powers = std::move(at_hi->first);
  out.lp = std::move(at_hi->second);
  return out;
}

double total_time_of(const TimeLpResult& lp) { return lp.tau0 + lp.tau.sum(); }

Allocation assemble(const RecoveredPowers& pw, const TimeLpResult& lp,
                    const NetworkInstance& inst) {
  const std::size_t k = inst.size();
  Allocation a;
  a.tau0 = lp.tau0;
  a.tau.assign(k, 0.0);
  a.beta.assign(k, 0.0);
  a.p.assign(k, 0.0);
  a.p0 = pw.p0 > 0.0 ? pw.p0 : inst.p_max;  // zero-length slot gets a placeholder
  for (std::size_t i = 0; i < k; ++i) {
    a.tau[i] = lp.tau(static_cast<int>(i));
    a.beta[i] = pw.beta(static_cast<int>(i));
    a.p[i] = pw.p(static_cast<int>(i)) > 0.0 ? pw.p(static_cast<int>(i)) : inst.p_max;
  }
  return a;
}

// Allocation-level gate: every transmitting slot must carry a power in
// (0, p_max]; otherwise the zero sentinel is returned upstream.
bool power_gate(const RecoveredPowers& pw, const TimeLpResult& lp, const NetworkInstance& inst) {
  const double cap = inst.p_max * (1.0 + 1e-12);
  if (lp.tau0 > 0.0 && !(pw.p0 > 0.0 && pw.p0 <= cap)) return false;
  for (int i = 0; i < pw.p.size(); ++i)
    if (lp.tau(i) > 0.0 && !(pw.p(i) > 0.0 && pw.p(i) <= cap)) return false;
  return true;
}

struct StepScales {
  double c1, c2, c3, c4, c5;
};

StepScales step_scales(const NetworkInstance& inst) {
  const int k = static_cast<int>(inst.size());
  double log_h = 0.0, log_hg = 0.0, mean_pc = 0.0, mean_rmin = 0.0;
  for (int i = 0; i < k; ++i) {
    log_h += std::log(inst.channels.h[static_cast<std::size_t>(i)]);
    log_hg += std::log(inst.channels.h[static_cast<std::size_t>(i)] *
                       inst.channels.g[static_cast<std::size_t>(i)]);
    mean_pc += inst.nodes[static_cast<std::size_t>(i)].p_c;
    mean_rmin += inst.nodes[static_cast<std::size_t>(i)].r_min;
  }
  const double h_bar = std::exp(log_h / k);
  const double hg_bar = std::exp(log_hg / k);
  mean_pc /= k;
  mean_rmin /= k;

  const double avd = inst.eh.a * inst.eh.v - inst.eh.d;
  const double alpha_ref = inst.eh.v * inst.eh.v / (avd * h_bar);
  const double energy_ref = std::max(mean_pc * inst.block_len, 1e-12);
  const double eps_ref = (kLn2 / inst.bandwidth) *
                         (inst.bandwidth * inst.noise_density / (inst.xi * hg_bar) +
                          0.5 * inst.p_max);
  const double rate_ref = std::max(mean_rmin, 1.0);

  StepScales s;
  s.c1 = alpha_ref / energy_ref;
  s.c2 = eps_ref / rate_ref;
  s.c3 = 1.0 / (inst.p_max * inst.block_len);
  s.c4 = 0.01 * inst.p_max / inst.block_len;
  s.c5 = 1.0 / (inst.p_max * inst.block_len);
  return s;
}

// Inner minimizer of the Lagrangian over durations restricted to [0, T]:
// linear in tau at the recovered power ratios, so each slot sits at 0 or T
// depending on the sign of its coefficient. Used for the dual value and for
// the residual point when the LP has no feasible solution.
PrimalIterate box_lagrangian_point(const RecoveredPowers& pw, const DualState& duals,
                                   const NetworkInstance& inst, double* dual_value) {
  const int k = static_cast<int>(inst.size());
  PrimalIterate pr;
  pr.theta = Eigen::VectorXd::Zero(k + 1);
  pr.lambda = Eigen::VectorXd::Zero(k);
  pr.tau = Eigen::VectorXd::Zero(k);

  // Probe slopes with unit durations at the fixed ratios.
  PrimalIterate probe;
  probe.tau0 = 1.0;
  probe.tau = Eigen::VectorXd::Ones(k);
  probe.theta = Eigen::VectorXd::Zero(k + 1);
  probe.lambda = Eigen::VectorXd::Zero(k);
  probe.theta(0) = pw.p0;
  for (int i = 0; i < k; ++i) {
    probe.theta(i + 1) = pw.p(i);
    probe.lambda(i) = pw.reflected(i);
  }

  double value = -duals.vartheta * inst.block_len;
  for (int i = 0; i < k; ++i)
    value += duals.eps(i) * inst.nodes[static_cast<std::size_t>(i)].r_min;

  // Directional slope of L when a slot grows at its fixed power ratios:
  // dL/dtau + P dL/dtheta + u dL/dlambda. The partial terms vanish at
  // interior recovery and carry the cap contribution when a power clamps.
  const double slope0 = lagrangian_d_tau(0, probe, duals, inst) +
                        pw.p0 * lagrangian_d_theta(0, probe, duals, inst);
  if (slope0 < 0.0) {
    pr.tau0 = inst.block_len;
    pr.theta(0) = pw.p0 * inst.block_len;
    value += slope0 * inst.block_len;
  }
  for (int i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double slope = lagrangian_d_tau(idx + 1, probe, duals, inst) +
                         pw.p(i) * lagrangian_d_theta(idx + 1, probe, duals, inst) +
                         pw.reflected(i) * lagrangian_d_lambda(idx, probe, duals, inst);
    if (slope < 0.0) {
      pr.tau(i) = inst.block_len;
      pr.theta(i + 1) = pw.p(i) * inst.block_len;
      pr.lambda(i) = pw.reflected(i) * inst.block_len;
      value += slope * inst.block_len;
    }
  }
  if (dual_value) *dual_value = value;
  return pr;
}

PrimalIterate lp_primal_point(const RecoveredPowers& pw, const TimeLpResult& lp,
                              const NetworkInstance& inst) {
  const int k = static_cast<int>(inst.size());
  PrimalIterate pr;
  pr.tau0 = lp.tau0;
  pr.tau = lp.tau;
  pr.theta = Eigen::VectorXd::Zero(k + 1);
  pr.lambda = Eigen::VectorXd::Zero(k);
  pr.theta(0) = pw.p0 * lp.tau0;
  for (int i = 0; i < k; ++i) {
    pr.theta(i + 1) = pw.p(i) * lp.tau(i);
    pr.lambda(i) = pw.reflected(i) * lp.tau(i);
  }
  return pr;
}

double relative_change(const DualState& a, const DualState& b, const StepScales& s) {
  double worst = 0.0;
  auto upd = [&worst](double oldv, double newv, double floor) {
    worst = std::max(worst, std::abs(newv - oldv) / (std::abs(oldv) + floor));
  };
  for (int i = 0; i < a.alpha.size(); ++i) upd(a.alpha(i), b.alpha(i), 1e-6 / s.c1);
  for (int i = 0; i < a.eps.size(); ++i) upd(a.eps(i), b.eps(i), 1e-6 / std::max(s.c2, 1e-300));
  for (int i = 0; i < a.kappa.size(); ++i) upd(a.kappa(i), b.kappa(i), 1e-9);
  for (int i = 0; i < a.omega.size(); ++i) upd(a.omega(i), b.omega(i), 1e-9);
  upd(a.vartheta, b.vartheta, 1e-9);
  return worst;
}

}  // namespace

SolveReport run_dynamic(const NetworkInstance& inst, const DynamicOptions& opts) {
  inst.validate();
  const int k = static_cast<int>(inst.size());

  SolveReport report;
  report.scheme = "dynamic";

  DualState duals = DualState::initial(inst.size());
  const StepScales scales = step_scales(inst);

  double best_energy = std::numeric_limits<double>::infinity();
  DualState best_duals = duals;
  double best_scale_hint = 1.0;
  double best_dual_value = -std::numeric_limits<double>::infinity();
  double boundary_hint = 1.0;

  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const RecoveredPowers pw = recover_capped(duals, inst);
    const TimeLpResult lp = solve_time_allocation(pw.p0, pw.p, pw.beta, inst, opts.lp);

    // Quick boundary probe from the current duals keeps the incumbent close
    // to the final answer from early iterations on.
    const BoundaryPoint probe = boundary_by_scale(duals, inst, opts, boundary_hint, 12);
    if (probe.found) {
      boundary_hint = probe.scale;
      if (power_gate(probe.powers, probe.lp, inst) && probe.lp.objective < best_energy) {
        best_energy = probe.lp.objective;
        best_duals = duals;
        best_scale_hint = probe.scale;
      }
    }
    if (lp.status == LpStatus::optimal && power_gate(pw, lp, inst) &&
        lp.objective < best_energy) {
      best_energy = lp.objective;
      best_duals = duals;
      best_scale_hint = 1.0;
    }

    double dual_value = 0.0;
    const PrimalIterate box_point = box_lagrangian_point(pw, duals, inst, &dual_value);
    best_dual_value = std::max(best_dual_value, dual_value);
    report.dual_objective.push_back(best_dual_value);

    if (opts.emit_trace) {
      TraceRow row;
      row.iteration = iter;
      row.energy = std::isfinite(best_energy) ? best_energy : 0.0;
      row.duals = duals.flat();
      report.trace.push_back(std::move(row));
    }

    const double damp = opts.step_scale / std::sqrt(static_cast<double>(iter) + 1.0);
    duals.step = {scales.c1 * damp, scales.c2 * damp, scales.c3 * damp, scales.c4 * damp,
                  scales.c5 * damp};

    const PrimalIterate residual_point =
        lp.status == LpStatus::optimal ? lp_primal_point(pw, lp, inst) : box_point;
    const DualState next = update_duals(duals, residual_point, inst, opts.sign);

    const double change = relative_change(duals, next, scales);
    duals = next;
    if (change < opts.tolerance && lp.status == LpStatus::optimal) {
      converged = true;
      ++iter;
      break;
    }
  }

  // Dual-space refinement around the best multipliers seen: a coordinate
  // search over the throughput multipliers (jointly and per node), each
  // evaluated at the energy-side feasibility boundary.
  DualState polish = best_duals;
  double polish_energy = best_energy;
  {
    const BoundaryPoint base =
        boundary_by_scale(polish, inst, opts, best_scale_hint, opts.boundary_iterations);
    if (base.found && power_gate(base.powers, base.lp, inst)) {
      polish_energy = base.lp.objective;
      best_scale_hint = base.scale;
    }
  }
  for (int round = 0; round < opts.polish_rounds; ++round) {
    const double before = polish_energy;
    for (int coord = -1; coord < k; ++coord) {
      double best_factor = 1.0;
      double width = 3.0;
      for (int stage = 0; stage < 3; ++stage) {
        const std::array<double, 4> factors = {best_factor / width,
                                               best_factor / std::sqrt(width),
                                               best_factor * std::sqrt(width),
                                               best_factor * width};
        for (double f : factors) {
          DualState cand = polish;
          if (coord < 0)
            cand.eps *= f;
          else
            cand.eps(coord) *= f;
          const BoundaryPoint bp = boundary_by_scale(cand, inst, opts, best_scale_hint, 24);
          if (!bp.found || !power_gate(bp.powers, bp.lp, inst)) continue;
          if (bp.lp.objective < polish_energy - 1e-15) {
            polish_energy = bp.lp.objective;
            best_factor = f;
            polish = cand;
            best_scale_hint = bp.scale;
          }
        }
        width = std::sqrt(width);
      }
    }
    if (before - polish_energy <= 1e-7 * std::max(before, 1e-300)) break;
  }

  // Final recovery at the refined multipliers.
  const BoundaryPoint final_bp =
      boundary_by_scale(polish, inst, opts, best_scale_hint, opts.boundary_iterations);

  report.iterations = iter;
  report.converged = converged;

  if (!final_bp.found || !power_gate(final_bp.powers, final_bp.lp, inst)) {
    report.status = SolveStatus::infeasible;
    report.feasible = false;
    report.allocation = Allocation::zero(inst.size());
    report.energy = 0.0;
    report.slacks = check_feasibility(report.allocation, inst);
    report.note = "no feasible power plan within (0, p_max]; zero sentinel returned";
    if (opts.emit_trace) {
      TraceRow row;
      row.iteration = report.iterations;
      row.energy = 0.0;
      row.duals = polish.flat();
      report.trace.push_back(std::move(row));
      report.iterations = static_cast<int>(report.trace.size());
    }
    return report;
  }

  report.status = SolveStatus::feasible;
  report.feasible = true;
  report.allocation = assemble(final_bp.powers, final_bp.lp, inst);
  report.energy = pb_energy(report.allocation);
  report.slacks = check_feasibility(report.allocation, inst);

  // Stationarity residuals of the transformed problem at the returned point.
  const DualState effective = scaled_alpha(polish, final_bp.scale);
  const PrimalIterate final_primal = lp_primal_point(final_bp.powers, final_bp.lp, inst);
  report.kkt_residuals.clear();
  for (int i = 0; i <= k; ++i)
    report.kkt_residuals.push_back(
        lagrangian_d_theta(static_cast<std::size_t>(i), final_primal, effective, inst));
  for (int i = 0; i < k; ++i)
    report.kkt_residuals.push_back(
        lagrangian_d_lambda(static_cast<std::size_t>(i), final_primal, effective, inst));

  if (opts.emit_trace) {
    TraceRow row;
    row.iteration = report.iterations;
    row.energy = report.energy;
    row.duals = effective.flat();
    report.trace.push_back(std::move(row));
    report.iterations = static_cast<int>(report.trace.size());
  }
  return report;
}

}  // namespace wpbc
