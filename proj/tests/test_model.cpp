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
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "wpbc/model.hpp"

using namespace wpbc;

namespace {

EhParams default_eh() { return EhParams(2.463, 1.635, 0.826); }

NetworkInstance small_instance(std::size_t k) {
  NetworkInstance inst{
      std::vector<NodeParams>(k, NodeParams{2400.0, 200e-6}),
      ChannelState{std::vector<double>(k, 5.12e-4), std::vector<double>(k, 5.12e-4)},
      default_eh(),
      10.0,    // T
      400e3,   // W
      1e-14,   // N0 (-110 dBm/Hz)
      dbm_to_watts(23.0),
      0.5};
  inst.validate();
  return inst;
}

}  // namespace

TEST_CASE("dbm conversion") {
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dbm_to_watts(0.0) == doctest::Approx(0.001).epsilon(1e-12));
  // 10^(-0.7), evaluated independently
  CHECK(dbm_to_watts(23.0) == doctest::Approx(0.19952623149688797).epsilon(1e-12));
  CHECK(watts_to_dbm(dbm_to_watts(17.3)) == doctest::Approx(17.3).epsilon(1e-12));
}

TEST_CASE("eh params invariants") {
  CHECK_NOTHROW(default_eh());
  CHECK_THROWS_AS(EhParams(2.463, 1.635, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(EhParams(2.463, 1.635, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(EhParams(1.0, 2.0, 1.0), std::invalid_argument);  // a*v - d < 0
}

TEST_CASE("harvested power curve") {
  const EhParams eh = default_eh();
  CHECK(harvested_power(0.0, eh) == doctest::Approx(0.0).epsilon(1e-15));
  // saturation limit (a*v - d)/v with the default parameters
  CHECK(eh.saturation() == doctest::Approx(0.48358111380145278).epsilon(1e-12));
  CHECK(harvested_power(1e9, eh) == doctest::Approx(eh.saturation()).epsilon(1e-8));
  // x = v sits exactly at half the saturation limit
  CHECK(harvested_power(eh.v, eh) == doctest::Approx(0.24179055690072639).epsilon(1e-12));
  CHECK(harvested_power(eh.v, eh) == doctest::Approx(eh.saturation() / 2).epsilon(1e-12));
}

TEST_CASE("harvested power slope") {
  const EhParams eh = default_eh();
  // (a*v - d)/v^2 at x = 0
  CHECK(harvested_power_slope(0.0, eh) == doctest::Approx(0.58544929031652879).epsilon(1e-12));
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> xs(0.0, 50.0);
  for (int i = 0; i < 200; ++i) CHECK(harvested_power_slope(xs(gen), eh) > 0.0);
  CHECK(harvested_power_slope(1e12, eh) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("harvested power is increasing and midpoint-concave, below saturation") {
  const EhParams eh = default_eh();
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> xs(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = xs(gen);
    const double h = 1e-4 + 0.1 * xs(gen);
    const double f0 = harvested_power(x, eh);
    const double f1 = harvested_power(x + h, eh);
    const double f2 = harvested_power(x + 2 * h, eh);
    CHECK(f1 >= f0);                          // nondecreasing
    CHECK(f2 - 2 * f1 + f0 <= 1e-12);         // second difference <= 0
    CHECK(f0 < eh.saturation());
  }
}

TEST_CASE("backscatter throughput") {
  const NetworkInstance inst = small_instance(1);
  SUBCASE("beta = 0 gives zero bits") {
    CHECK(backscatter_throughput(3.0, 0.0, 0.1, 1e-3, 1e-3, inst) == 0.0);
  }
  SUBCASE("tau = 0 gives zero bits by continuity") {
    CHECK(backscatter_throughput(0.0, 0.5, 0.1, 1e-3, 1e-3, inst) == 0.0);
  }
  SUBCASE("snr = 1 gives exactly W*tau bits") {
    // Choose p so that xi*beta*p*h*g == W*N0.
    const double h = 1e-3, g = 1e-3, beta = 0.5;
    const double p = inst.bandwidth * inst.noise_density / (inst.xi * beta * h * g);
    const double tau = 2.5;
    CHECK(backscatter_throughput(tau, beta, p, h, g, inst) ==
          doctest::Approx(inst.bandwidth * tau).epsilon(1e-12));
  }
  SUBCASE("nondecreasing in beta, p and tau") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
      const double tau = 5.0 * u(gen), beta = u(gen), p = 0.2 * u(gen);
      const double h = 1e-3 * (0.1 + u(gen)), g = 1e-3 * (0.1 + u(gen));
      const double base = backscatter_throughput(tau, beta, p, h, g, inst);
      CHECK(backscatter_throughput(tau + 0.1, beta, p, h, g, inst) >= base);
      CHECK(backscatter_throughput(tau, std::min(1.0, beta + 0.1), p, h, g, inst) >= base);
      CHECK(backscatter_throughput(tau, beta, p + 0.01, h, g, inst) >= base);
    }
  }
}

TEST_CASE("total harvested energy") {
  NetworkInstance inst = small_instance(2);
  SUBCASE("all tau zero harvests nothing") {
    Allocation a = Allocation::zero(2);
    CHECK(total_harvested_energy(a, 0, inst) == 0.0);
  }
  SUBCASE("full reflection in own slot harvests nothing from it") {
    NetworkInstance one = small_instance(1);
    Allocation a = Allocation::zero(1);
    a.tau = {4.0};
    a.beta = {1.0};
    a.p = {0.1};
    a.tau0 = 0.0;
    CHECK(total_harvested_energy(a, 0, one) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("matches a term-by-term sum") {
    inst.channels.h = {2e-4, 7e-4};
    Allocation a;
    a.tau0 = 1.5;
    a.tau = {2.0, 3.0};
    a.beta = {0.25, 0.75};
    a.p0 = 0.05;
    a.p = {0.12, 0.19};
    // Node 0, written out term by term from the slot structure.
    const EhParams eh = inst.eh;
    auto f = [&](double x) { return (eh.a * x + eh.d) / (x + eh.v) - eh.d / eh.v; };
    const double h0 = inst.channels.h[0];
    const double expected = f((1.0 - 0.25) * 0.12 * h0) * 2.0  // own slot, unreflected share
                            + f(0.05 * h0) * 1.5               // charging slot
                            + f(0.19 * h0) * 3.0;              // the other node's slot
    CHECK(total_harvested_energy(a, 0, inst) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("pb energy") {
  Allocation a = Allocation::zero(3);
  CHECK(pb_energy(a) == 0.0);
  a.tau0 = 1.0;
  a.tau = {2.0, 3.0, 0.5};
  a.p0 = 0.2;
  a.p = {0.2, 0.2, 0.2};
  CHECK(pb_energy(a) == doctest::Approx(0.2 * 6.5).epsilon(1e-14));  // c * sum(tau)

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Allocation r = Allocation::zero(2);
    r.tau0 = u(gen);
    r.tau = {u(gen), u(gen)};
    r.p0 = u(gen);
    r.p = {u(gen), u(gen)};
    const double dot = r.p0 * r.tau0 + r.p[0] * r.tau[0] + r.p[1] * r.tau[1];
    CHECK(pb_energy(r) == doctest::Approx(dot).epsilon(1e-14));
    CHECK(pb_energy(r) >= 0.0);
  }
}

TEST_CASE("feasibility report") {
  const NetworkInstance inst = small_instance(1);
  SUBCASE("zero allocation with positive rate requirement is infeasible") {
    const auto rep = check_feasibility(Allocation::zero(1), inst);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.rate_slack[0] < 0.0);
  }
  SUBCASE("time overrun reports negative slack") {
    Allocation a = Allocation::zero(1);
    a.tau0 = inst.block_len + 1.0;
    a.p0 = 0.1;
    const auto rep = check_feasibility(a, inst);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.time_slack == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("power cap violation is reported in watts") {
    Allocation a = Allocation::zero(1);
    a.tau0 = 1.0;
    a.p0 = inst.p_max + 0.25;
    const auto rep = check_feasibility(a, inst);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.power_violation[0] == doctest::Approx(0.25).epsilon(1e-9));
  }
}

TEST_CASE("instance validation") {
  NetworkInstance inst = small_instance(2);
  CHECK_NOTHROW(inst.validate());
  NetworkInstance bad = inst;
  bad.channels.h[0] = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = inst;
  bad.xi = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = inst;
  bad.nodes.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
