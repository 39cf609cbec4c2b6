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
#include "wpbc/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wpbc {

double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

double watts_to_dbm(double p_watts) {
  if (p_watts <= 0.0) throw std::invalid_argument("watts_to_dbm: power must be > 0");
  return 10.0 * std::log10(p_watts) + 30.0;
}

EhParams::EhParams(double a_in, double d_in, double v_in) : a(a_in), d(d_in), v(v_in) {
  if (!(v > 0.0)) throw std::invalid_argument("EhParams: v must be > 0");
  if (!(a * v - d > 0.0))
    throw std::invalid_argument("EhParams: a*v - d must be > 0 for a positive harvester slope");
}

void NetworkInstance::validate() const {
  const std::size_t k = nodes.size();
  if (k < 1) throw std::invalid_argument("NetworkInstance: need at least one node");
  if (channels.h.size() != k || channels.g.size() != k)
    throw std::invalid_argument("NetworkInstance: channel gain count must match node count");
  for (std::size_t i = 0; i < k; ++i) {
    if (!(channels.h[i] > 0.0) || !(channels.g[i] > 0.0))
      throw std::invalid_argument("NetworkInstance: channel gains must be > 0");
    if (nodes[i].r_min < 0.0 || nodes[i].p_c < 0.0)
      throw std::invalid_argument("NetworkInstance: r_min and p_c must be >= 0");
  }
  if (!(block_len > 0.0)) throw std::invalid_argument("NetworkInstance: block length must be > 0");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("NetworkInstance: bandwidth must be > 0");
  if (!(noise_density > 0.0))
    throw std::invalid_argument("NetworkInstance: noise density must be > 0");
  if (!(p_max > 0.0)) throw std::invalid_argument("NetworkInstance: p_max must be > 0");
  if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("NetworkInstance: xi must be in (0,1)");
}

Allocation Allocation::zero(std::size_t k) {
  Allocation a;
  a.tau0 = 0.0;
  a.tau.assign(k, 0.0);
  a.beta.assign(k, 0.0);
  a.p0 = 0.0;
  a.p.assign(k, 0.0);
  return a;
}

double Allocation::total_time() const {
  double t = tau0;
  for (double ti : tau) t += ti;
  return t;
}

double harvested_power(double x, const EhParams& eh) {
  return (eh.a * x + eh.d) / (x + eh.v) - eh.d / eh.v;
}

double harvested_power_slope(double x, const EhParams& eh) {
  const double s = x + eh.v;
  return (eh.a * eh.v - eh.d) / (s * s);
}

double backscatter_throughput(double tau, double beta, double p, double h, double g,
                              const NetworkInstance& inst) {
  if (tau <= 0.0) return 0.0;
  const double snr = inst.xi * beta * p * h * g / (inst.bandwidth * inst.noise_density);
  return inst.bandwidth * tau * std::log2(1.0 + snr);
}

double total_harvested_energy(const Allocation& alloc, std::size_t k,
                              const NetworkInstance& inst) {
  const double hk = inst.channels.h[k];
  double e = harvested_power((1.0 - alloc.beta[k]) * alloc.p[k] * hk, inst.eh) * alloc.tau[k];
  e += harvested_power(alloc.p0 * hk, inst.eh) * alloc.tau0;
  for (std::size_t i = 0; i < alloc.tau.size(); ++i) {
    if (i == k) continue;
    e += harvested_power(alloc.p[i] * hk, inst.eh) * alloc.tau[i];
  }
  return e;
}

double pb_energy(const Allocation& alloc) {
  double e = alloc.p0 * alloc.tau0;
  for (std::size_t i = 0; i < alloc.tau.size(); ++i) e += alloc.p[i] * alloc.tau[i];
  return e;
}

FeasibilityReport check_feasibility(const Allocation& alloc, const NetworkInstance& inst,
                                    const FeasibilityTolerance& tol) {
  const std::size_t k = inst.size();
  FeasibilityReport rep;
  rep.rate_slack.resize(k);
  rep.energy_slack.resize(k);
  rep.power_violation.assign(k + 1, 0.0);
  rep.beta_violation.assign(k, 0.0);

  bool ok = true;
  for (std::size_t i = 0; i < k; ++i) {
    const double rate = backscatter_throughput(alloc.tau[i], alloc.beta[i], alloc.p[i],
                                               inst.channels.h[i], inst.channels.g[i], inst);
    rep.rate_slack[i] = rate - inst.nodes[i].r_min;
    if (rep.rate_slack[i] < -tol.rate_rel * std::max(inst.nodes[i].r_min, 1.0)) ok = false;

    rep.energy_slack[i] = total_harvested_energy(alloc, i, inst) - inst.nodes[i].p_c * alloc.tau[i];
    if (rep.energy_slack[i] < -tol.energy_abs) ok = false;

    rep.beta_violation[i] =
        std::max(0.0, alloc.beta[i] - 1.0) + std::max(0.0, -alloc.beta[i]);
    if (rep.beta_violation[i] > tol.beta_abs) ok = false;
  }

  rep.time_slack = inst.block_len - alloc.total_time();
  if (rep.time_slack < -tol.time_rel * inst.block_len) ok = false;
  if (alloc.tau0 < -tol.time_rel * inst.block_len) ok = false;
  for (double ti : alloc.tau)
    if (ti < -tol.time_rel * inst.block_len) ok = false;

  auto power_violation = [&](double p, double tau) {
    double v = std::max(0.0, p - inst.p_max);
    if (p < 0.0) v += -p;
    if (tau > 0.0 && p <= 0.0) v = std::max(v, tol.power_abs * 2.0);
    return v;
  };
  rep.power_violation[0] = power_violation(alloc.p0, alloc.tau0);
  for (std::size_t i = 0; i < k; ++i)
    rep.power_violation[i + 1] = power_violation(alloc.p[i], alloc.tau[i]);
  for (double pv : rep.power_violation)
    if (pv > tol.power_abs) ok = false;

  rep.feasible = ok;
  return rep;
}

}  // namespace wpbc
