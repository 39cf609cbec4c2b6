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
#include "wpbc/static_power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wpbc/bisect.hpp"

namespace wpbc {
namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Tangent slope of the own-slot harvest in the reflection ratio:
// p h (d - a v) / ((1-y) p h + v)^2, negative since a v - d > 0.
double own_slot_slope(double y, double p, double h, const EhParams& eh) {
  const double ph = p * h;
  const double s = (1.0 - y) * ph + eh.v;
  return ph * (eh.d - eh.a * eh.v) / (s * s);
}

}  // namespace

double linearized_energy(std::size_t k, double y, const Eigen::VectorXd& reflect_seconds,
                         double tau0, const Eigen::VectorXd& tau, double p,
                         const NetworkInstance& inst) {
  const int ki = static_cast<int>(k);
  const double hk = inst.channels.h[k];
  const double own = harvested_power((1.0 - y) * p * hk, inst.eh);
  const double slope = own_slot_slope(y, p, hk, inst.eh);
  double e = own * tau(ki) + slope * (reflect_seconds(ki) - y * tau(ki));
  const double other = harvested_power(p * hk, inst.eh);
  e += other * tau0;
  for (int j = 0; j < tau.size(); ++j)
    if (j != ki) e += other * tau(j);
  return e;
}

StaticTimeResult solve_time_subproblem(double p, const NetworkInstance& inst,
                                       const StaticIterate& init, const StaticOptions& opts) {
  if (!(p > 0.0)) throw std::invalid_argument("solve_time_subproblem: p must be > 0");
  const int k = static_cast<int>(inst.size());
  const int n = 2 * k + 1;  // (tau0, tau_1..K, reflect_seconds_1..K)
  const double t_block = inst.block_len;

  StaticTimeResult out;
  out.tau = Eigen::VectorXd::Zero(k);
  out.reflect_seconds = Eigen::VectorXd::Zero(k);

  Eigen::VectorXd y = init.expansion.size() == k ? init.expansion
                                                 : Eigen::VectorXd::Constant(k, 0.5);
  for (int i = 0; i < k; ++i) y(i) = std::clamp(y(i), 0.0, 1.0);

  std::optional<Eigen::VectorXd> warm;
  if (init.tau.size() == k && init.reflect_seconds.size() == k) {
    Eigen::VectorXd x0(n);
    x0(0) = init.tau0;
    x0.segment(1, k) = init.tau;
    x0.segment(1 + k, k) = init.reflect_seconds;
    warm = x0;
  }

  double prev_obj = kInf;
  for (int round = 0; round < opts.sca_max_iterations; ++round) {
    SmoothConvexProgram prog;
    prog.n = n;
    prog.lower = Eigen::VectorXd::Zero(n);
    prog.upper = Eigen::VectorXd::Constant(n, t_block);
    prog.start = warm;

    const double p_cost = p;
    prog.objective = [n, p_cost, k](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      if (grad) {
        grad->setZero(n);
        grad->head(k + 1).setConstant(p_cost);
      }
      return p_cost * x.head(k + 1).sum();
    };

    // Throughput rows, concave perspective of the rate in (reflect, tau).
    for (int i = 0; i < k; ++i) {
      const double r_min = inst.nodes[static_cast<std::size_t>(i)].r_min;
      if (r_min <= 0.0) continue;
      const double c = inst.xi * p * inst.channels.h[static_cast<std::size_t>(i)] *
                       inst.channels.g[static_cast<std::size_t>(i)] /
                       (inst.bandwidth * inst.noise_density);
      const double w = inst.bandwidth;
      prog.constraints.push_back([i, k, n, c, w, r_min](const Eigen::VectorXd& x,
                                                        Eigen::VectorXd* grad) {
        const double tau = x(1 + i);
        const double el = x(1 + k + i);
        if (tau <= 0.0) return kInf;
        const double u = c * el / tau;
        const double rate = w * tau * std::log2(1.0 + u);
        if (grad) {
          grad->setZero(n);
          (*grad)(1 + i) = -w / kLn2 * (std::log1p(u) - u / (1.0 + u));
          (*grad)(1 + k + i) = -w * c / ((1.0 + u) * kLn2);
        }
        return r_min - rate;
      });
    }

    // Linearized energy rows, affine in x.
    for (int i = 0; i < k; ++i) {
      const double hk = inst.channels.h[static_cast<std::size_t>(i)];
      const double own = harvested_power((1.0 - y(i)) * p * hk, inst.eh);
      const double slope = own_slot_slope(y(i), p, hk, inst.eh);
      const double other = harvested_power(p * hk, inst.eh);
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row(0) = -other;
      for (int j = 0; j < k; ++j)
        row(1 + j) = j == i ? inst.nodes[static_cast<std::size_t>(i)].p_c - own + slope * y(i)
                            : -other;
      row(1 + k + i) = -slope;
      prog.constraints.push_back([row](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        if (grad) *grad = row;
        return row.dot(x);
      });
    }

    // Time budget and the per-slot ordering reflect_seconds <= tau.
    {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row.head(k + 1).setOnes();
      const double t = t_block;
      prog.constraints.push_back([row, t](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        if (grad) *grad = row;
        return row.dot(x) - t;
      });
    }
    for (int i = 0; i < k; ++i) {
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row(1 + k + i) = 1.0;
      row(1 + i) = -1.0;
      prog.constraints.push_back([row](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        if (grad) *grad = row;
        return row.dot(x);
      });
    }

    const ConvexResult res = solve_smooth_convex(prog, opts.inner);
    if (res.status == ConvexStatus::infeasible) {
      out.status = ConvexStatus::infeasible;
      return out;
    }

    out.last = res;
    out.tau0 = std::max(0.0, res.x(0));
    for (int i = 0; i < k; ++i) {
      out.tau(i) = std::max(0.0, res.x(1 + i));
      out.reflect_seconds(i) = std::clamp(res.x(1 + k + i), 0.0, out.tau(i));
    }
    out.objective = p * (out.tau0 + out.tau.sum());
    out.sca_trace.push_back(out.objective);
    out.status = ConvexStatus::optimal;

    if (round > 0 &&
        std::abs(prev_obj - out.objective) <= opts.sca_tol * std::max(std::abs(prev_obj), 1e-300))
      break;
    prev_obj = out.objective;
    warm = res.x;
    for (int i = 0; i < k; ++i)
      if (out.tau(i) > 1e-12 * t_block)
        y(i) = std::clamp(out.reflect_seconds(i) / out.tau(i), 0.0, 1.0);
  }
  return out;
}

StaticPowerResult solve_power_subproblem(double tau0, const Eigen::VectorXd& tau,
                                         const Eigen::VectorXd& beta, const NetworkInstance& inst,
                                         const StaticOptions& opts) {
  const int k = static_cast<int>(inst.size());
  StaticPowerResult out;

  double total_time = tau0 + tau.sum();
  if (total_time <= 0.0) {
    // Nothing transmits; any power is vacuously feasible.
    out.feasible = true;
    out.p = inst.p_max / 2.0;
    return out;
  }

  auto min_slack = [&](double p) {
    double worst = kInf;
    for (int i = 0; i < k; ++i) {
      const std::size_t idx = static_cast<std::size_t>(i);
      const double r_min = inst.nodes[idx].r_min;
      if (r_min > 0.0) {
        const double rate = backscatter_throughput(tau(i), beta(i), p, inst.channels.h[idx],
                                                   inst.channels.g[idx], inst);
        worst = std::min(worst, (rate - r_min) / std::max(r_min, 1.0));
      }
      if (tau(i) > 0.0) {
        const double hk = inst.channels.h[idx];
        double harvested = harvested_power((1.0 - beta(i)) * p * hk, inst.eh) * tau(i) +
                           harvested_power(p * hk, inst.eh) * tau0;
        for (int j = 0; j < k; ++j)
          if (j != i) harvested += harvested_power(p * hk, inst.eh) * tau(j);
        const double consumed = inst.nodes[idx].p_c * tau(i);
        worst = std::min(worst, (harvested - consumed) /
                                    std::max(consumed, 1e-12 * inst.block_len));
      }
    }
    return worst;
  };

  if (min_slack(inst.p_max) < 0.0) {
    out.feasible = false;
    return out;
  }

  auto f = [&](double p) { return -min_slack(p); };
  double p = bisect_decreasing(f, 0.0, 0.0, inst.p_max, 1e-13 * inst.p_max);
  for (int guard = 0; guard < 100 && min_slack(p) < 0.0; ++guard)
    p = std::min(inst.p_max, p + 1e-12 * inst.p_max);
  if (min_slack(p) < 0.0) {
    out.feasible = false;
    return out;
  }
  out.feasible = true;
  out.p = p;
  return out;
}

SolveReport run_static(const NetworkInstance& inst, const StaticOptions& opts) {
  inst.validate();
  const int k = static_cast<int>(inst.size());

  SolveReport report;
  report.scheme = "static";

  auto finish_infeasible = [&]() {
    report.status = SolveStatus::infeasible;
    report.feasible = false;
    report.allocation = Allocation::zero(inst.size());
    report.energy = 0.0;
    report.slacks = check_feasibility(report.allocation, inst);
    report.note = "no constant power in (0, p_max] satisfies the constraints; zero sentinel";
    report.iterations = static_cast<int>(report.trace.size());
    return report;
  };

  StaticIterate iterate;
  iterate.p = inst.p_max / 2.0;
  iterate.tau = Eigen::VectorXd::Zero(k);
  iterate.reflect_seconds = Eigen::VectorXd::Zero(k);
  iterate.expansion = Eigen::VectorXd::Constant(k, 0.5);

  StaticTimeResult sub = solve_time_subproblem(iterate.p, inst, iterate, opts);
  if (sub.status != ConvexStatus::optimal) {
    iterate.p = inst.p_max;
    sub = solve_time_subproblem(iterate.p, inst, iterate, opts);
    if (sub.status != ConvexStatus::optimal) return finish_infeasible();
  }

  auto append_trace = [&](const std::vector<double>& values) {
    for (double v : values) {
      TraceRow row;
      row.iteration = static_cast<int>(report.trace.size());
      row.energy = v;
      report.trace.push_back(std::move(row));
    }
  };
  append_trace(sub.sca_trace);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  bool converged = false;
  int bcd_iter = 0;
  for (; bcd_iter < opts.bcd_max_iterations; ++bcd_iter) {
    for (int i = 0; i < k; ++i)
      beta(i) = sub.tau(i) > 1e-12 * inst.block_len
                    ? std::clamp(sub.reflect_seconds(i) / sub.tau(i), 0.0, 1.0)
                    : 0.0;

    const StaticPowerResult power = solve_power_subproblem(sub.tau0, sub.tau, beta, inst, opts);
    if (!power.feasible) return finish_infeasible();
    iterate.p = power.p;
    append_trace({iterate.p * (sub.tau0 + sub.tau.sum())});

    iterate.tau0 = sub.tau0;
    iterate.tau = sub.tau;
    iterate.reflect_seconds = sub.reflect_seconds;
    for (int i = 0; i < k; ++i) iterate.expansion(i) = beta(i);

    const StaticTimeResult next = solve_time_subproblem(iterate.p, inst, iterate, opts);
    if (next.status != ConvexStatus::optimal) return finish_infeasible();
    append_trace(next.sca_trace);

    // Convergence is measured on the time/reflection block only.
    double change = std::abs(next.tau0 - iterate.tau0) / inst.block_len;
    for (int i = 0; i < k; ++i) {
      change = std::max(change, std::abs(next.tau(i) - iterate.tau(i)) / inst.block_len);
      change = std::max(change, std::abs(next.reflect_seconds(i) - iterate.reflect_seconds(i)) /
                                    inst.block_len);
    }
    sub = next;
    if (change < opts.bcd_tol) {
      converged = true;
      ++bcd_iter;
      break;
    }
  }

  for (int i = 0; i < k; ++i)
    beta(i) = sub.tau(i) > 1e-12 * inst.block_len
                  ? std::clamp(sub.reflect_seconds(i) / sub.tau(i), 0.0, 1.0)
                  : 0.0;
  const StaticPowerResult power = solve_power_subproblem(sub.tau0, sub.tau, beta, inst, opts);
  if (!power.feasible) return finish_infeasible();
  iterate.p = power.p;
  append_trace({iterate.p * (sub.tau0 + sub.tau.sum())});

  if (!(iterate.p > 0.0 && iterate.p <= inst.p_max * (1.0 + 1e-12))) return finish_infeasible();

  report.status = SolveStatus::feasible;
  report.feasible = true;
  report.converged = converged;
  report.allocation.tau0 = sub.tau0;
  report.allocation.tau.assign(static_cast<std::size_t>(k), 0.0);
  report.allocation.beta.assign(static_cast<std::size_t>(k), 0.0);
  report.allocation.p.assign(static_cast<std::size_t>(k), iterate.p);
  report.allocation.p0 = iterate.p;
  for (int i = 0; i < k; ++i) {
    report.allocation.tau[static_cast<std::size_t>(i)] = sub.tau(i);
    report.allocation.beta[static_cast<std::size_t>(i)] = beta(i);
  }
  report.energy = pb_energy(report.allocation);
  report.slacks = check_feasibility(report.allocation, inst);
  report.kkt_residuals = {sub.last.kkt_stationarity, sub.last.kkt_complementarity,
                          sub.last.max_violation};
  report.iterations = static_cast<int>(report.trace.size());
  return report;
}

}  // namespace wpbc
