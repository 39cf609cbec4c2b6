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
#include "wpbc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace wpbc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Grids {
  // Dynamic mode: power[0] is the charging-slot axis, power[1+i] node i's.
  // Static mode: power[0] is the single shared axis.
  std::vector<std::vector<double>> power;
  std::vector<std::vector<double>> beta;
};

std::vector<double> linear_axis(double lo, double hi, int points) {
  std::vector<double> v(static_cast<std::size_t>(points));
  if (points == 1) {
    v[0] = 0.5 * (lo + hi);
    return v;
  }
  for (int j = 0; j < points; ++j)
    v[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / (points - 1);
  return v;
}

// The inner loop runs on precomputed per-axis tables; every candidate then
// costs a handful of lookups instead of logs and divisions.
struct Tables {
  std::size_t k = 0;
  bool shared_power = false;
  std::vector<std::size_t> np;            // points per power axis
  std::vector<std::size_t> nb;            // points per beta axis
  // Per node i over (its power index q, its beta index b), flattened q*nb+b:
  std::vector<std::vector<double>> tau;   // rate-tight duration, inf = impossible
  std::vector<std::vector<double>> own;   // own-slot harvest power
  // cross[i*k + j][q]: what node i harvests per second of node j's slot.
  std::vector<std::vector<double>> cross;
  // charge[i][q0]: what node i harvests per second of the charging slot.
  std::vector<std::vector<double>> charge;
};

Tables build_tables(const NetworkInstance& inst, OracleMode mode, const Grids& grids) {
  const std::size_t k = inst.size();
  Tables t;
  t.k = k;
  t.shared_power = mode == OracleMode::static_power;
  auto node_axis = [&](std::size_t i) -> const std::vector<double>& {
    return t.shared_power ? grids.power[0] : grids.power[i + 1];
  };

  t.np.resize(k);
  t.nb.resize(k);
  t.tau.resize(k);
  t.own.resize(k);
  t.cross.resize(k * k);
  t.charge.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& paxis = node_axis(i);
    const auto& baxis = grids.beta[i];
    t.np[i] = paxis.size();
    t.nb[i] = baxis.size();
    t.tau[i].assign(paxis.size() * baxis.size(), kInf);
    t.own[i].assign(paxis.size() * baxis.size(), 0.0);
    const double r_min = inst.nodes[i].r_min;
    const double hg = inst.channels.h[i] * inst.channels.g[i];
    const double wn0 = inst.bandwidth * inst.noise_density;
    for (std::size_t q = 0; q < paxis.size(); ++q) {
      for (std::size_t b = 0; b < baxis.size(); ++b) {
        const double p = paxis[q];
        const double beta = baxis[b];
        const std::size_t at = q * baxis.size() + b;
        t.own[i][at] = harvested_power((1.0 - beta) * p * inst.channels.h[i], inst.eh);
        if (r_min <= 0.0) {
          t.tau[i][at] = 0.0;
        } else {
          const double snr = inst.xi * beta * p * hg / wn0;
          if (snr > 0.0) t.tau[i][at] = r_min / (inst.bandwidth * std::log2(1.0 + snr));
        }
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto& owner_axis = node_axis(j);
      auto& col = t.cross[i * k + j];
      col.resize(owner_axis.size());
      for (std::size_t q = 0; q < owner_axis.size(); ++q)
        col[q] = harvested_power(owner_axis[q] * inst.channels.h[i], inst.eh);
    }
    auto& ch = t.charge[i];
    ch.resize(grids.power[0].size());
    for (std::size_t q = 0; q < grids.power[0].size(); ++q)
      ch[q] = harvested_power(grids.power[0][q] * inst.channels.h[i], inst.eh);
  }
  return t;
}

struct ScanBest {
  double energy = kInf;
  double p0 = 0.0;
  std::vector<double> p, beta;
  double tau0 = 0.0;
  std::vector<double> tau;
  bool found = false;
};

ScanBest scan(const NetworkInstance& inst, OracleMode mode, const Grids& grids, int threads) {
  const std::size_t k = inst.size();
  const Tables tab = build_tables(inst, mode, grids);
  const std::vector<double>& p0_axis = grids.power[0];
  const bool shared = tab.shared_power;
  const double t_block = inst.block_len;

  // Flatten all remaining axes into one odometer: node power axes (dynamic
  // mode only) followed by the beta axes.
  std::vector<std::size_t> limits;
  if (!shared)
    for (std::size_t i = 0; i < k; ++i) limits.push_back(tab.np[i]);
  for (std::size_t i = 0; i < k; ++i) limits.push_back(tab.nb[i]);

  auto scan_chunk = [&](std::size_t begin, std::size_t end) {
    ScanBest best;
    std::vector<std::size_t> idx(limits.size(), 0);
    std::vector<double> pc(k), taus(k), covered(k);
    std::vector<std::size_t> qi(k), bi(k);
    for (std::size_t i = 0; i < k; ++i) pc[i] = inst.nodes[i].p_c;

    for (std::size_t a = begin; a < end; ++a) {
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        for (std::size_t i = 0; i < k; ++i) {
          qi[i] = shared ? a : idx[i];
          bi[i] = shared ? idx[i] : idx[k + i];
        }

        bool ok = true;
        double time_bc = 0.0;
        for (std::size_t i = 0; i < k && ok; ++i) {
          taus[i] = tab.tau[i][qi[i] * tab.nb[i] + bi[i]];
          if (!(taus[i] < kInf)) ok = false;
          time_bc += taus[i];
        }
        if (ok && time_bc <= t_block) {
          double tau0 = 0.0;
          for (std::size_t i = 0; i < k && ok; ++i) {
            double cov = tab.own[i][qi[i] * tab.nb[i] + bi[i]] * taus[i];
            for (std::size_t j = 0; j < k; ++j) {
              if (j == i) continue;
              cov += tab.cross[i * k + j][qi[j]] * taus[j];
            }
            const double deficit = pc[i] * taus[i] - cov;
            if (deficit > 0.0) {
              const double rate = tab.charge[i][a];
              if (rate <= 0.0) {
                ok = false;
                break;
              }
              tau0 = std::max(tau0, deficit / rate);
            }
          }
          if (ok && tau0 + time_bc <= t_block) {
            double energy = p0_axis[a] * tau0;
            for (std::size_t i = 0; i < k; ++i) {
              const double p = shared ? p0_axis[a]
                                      : grids.power[i + 1][qi[i]];
              energy += p * taus[i];
            }
            if (energy < best.energy) {
              best.energy = energy;
              best.found = true;
              best.p0 = p0_axis[a];
              best.tau0 = tau0;
              best.tau = taus;
              best.p.resize(k);
              best.beta.resize(k);
              for (std::size_t i = 0; i < k; ++i) {
                best.p[i] = shared ? p0_axis[a] : grids.power[i + 1][qi[i]];
                best.beta[i] = grids.beta[i][bi[i]];
              }
            }
          }
        }

        std::size_t d = 0;
        for (; d < idx.size(); ++d) {
          if (++idx[d] < limits[d]) break;
          idx[d] = 0;
        }
        if (d == idx.size()) break;
      }
    }
    return best;
  };

  const int n_threads =
      threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::size_t total = p0_axis.size();
  if (n_threads <= 1 || total < 4) return scan_chunk(0, total);

  std::vector<std::future<ScanBest>> futures;
  const std::size_t chunk =
      (total + static_cast<std::size_t>(n_threads) - 1) / static_cast<std::size_t>(n_threads);
  for (std::size_t begin = 0; begin < total; begin += chunk)
    futures.push_back(
        std::async(std::launch::async, scan_chunk, begin, std::min(begin + chunk, total)));
  ScanBest best;
  for (auto& f : futures) {
    ScanBest b = f.get();
    // Strict comparison keeps the earliest chunk on ties, so the merged
    // result does not depend on completion order.
    if (b.found && b.energy < best.energy) best = std::move(b);
  }
  return best;
}

Grids level_grids(const NetworkInstance& inst, OracleMode mode, const OracleOptions& opts,
                  const ScanBest* incumbent) {
  const std::size_t k = inst.size();
  const int res = opts.resolution;
  const std::size_t n_power = mode == OracleMode::dynamic_power ? k + 1 : 1;

  Grids g;
  g.power.resize(n_power);
  g.beta.resize(k);

  auto power_axis = [&](double center, bool refined) {
    if (opts.fixed_power) return std::vector<double>{*opts.fixed_power};
    if (!refined) {
      // (0, p_max]: res points excluding zero; nested when res doubles.
      std::vector<double> v(static_cast<std::size_t>(res));
      for (int j = 0; j < res; ++j)
        v[static_cast<std::size_t>(j)] = inst.p_max * (j + 1) / static_cast<double>(res);
      return v;
    }
    const double width = inst.p_max / 4.0;
    const double lo = std::max(inst.p_max / (4.0 * res), center - width / 2.0);
    const double hi = std::min(inst.p_max, lo + width);
    return linear_axis(std::max(lo, 1e-12 * inst.p_max), hi, res + 1);
  };
  auto beta_axis = [&](double center, bool refined) {
    if (!refined) return linear_axis(0.0, 1.0, res + 1);
    const double width = 0.25;
    const double lo = std::max(0.0, center - width / 2.0);
    const double hi = std::min(1.0, lo + width);
    return linear_axis(lo, hi, res + 1);
  };

  if (!incumbent) {
    for (std::size_t i = 0; i < n_power; ++i) g.power[i] = power_axis(0.0, false);
    for (std::size_t i = 0; i < k; ++i) g.beta[i] = beta_axis(0.0, false);
  } else {
    g.power[0] = power_axis(incumbent->p0, true);
    for (std::size_t i = 1; i < n_power; ++i) g.power[i] = power_axis(incumbent->p[i - 1], true);
    for (std::size_t i = 0; i < k; ++i) g.beta[i] = beta_axis(incumbent->beta[i], true);
  }
  return g;
}

}  // namespace

OracleResult grid_search(const NetworkInstance& inst, OracleMode mode,
                         const OracleOptions& opts) {
  inst.validate();
  if (inst.size() > 2)
    throw std::invalid_argument("grid_search: exhaustive search is limited to K <= 2");
  if (opts.resolution < 16) throw std::invalid_argument("grid_search: resolution must be >= 16");
  if (opts.levels < 1) throw std::invalid_argument("grid_search: levels must be >= 1");

  ScanBest best = scan(inst, mode, level_grids(inst, mode, opts, nullptr), opts.threads);
  for (int level = 1; level < opts.levels && best.found; ++level) {
    ScanBest refined = scan(inst, mode, level_grids(inst, mode, opts, &best), opts.threads);
    if (refined.found && refined.energy < best.energy) best = std::move(refined);
  }

  OracleResult out;
  if (!best.found) {
    out.feasible = false;
    out.allocation = Allocation::zero(inst.size());
    out.energy = 0.0;
    return out;
  }
  out.feasible = true;
  out.energy = best.energy;
  out.allocation.tau0 = best.tau0;
  out.allocation.tau = best.tau;
  out.allocation.beta = best.beta;
  out.allocation.p0 = best.p0;
  out.allocation.p = best.p;
  return out;
}

OracleResult grid_search(const NetworkInstance& inst, int resolution, OracleMode mode) {
  OracleOptions opts;
  opts.resolution = resolution;
  return grid_search(inst, mode, opts);
}

}  // namespace wpbc
