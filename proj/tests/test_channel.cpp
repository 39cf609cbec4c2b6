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
#include <stdexcept>

#include "wpbc/channel.hpp"

using namespace wpbc;

TEST_CASE("link gain") {
  CHECK(link_gain(1.0, 3.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(link_gain(10.0, 3.0, 1.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(link_gain(12.5, 3.0, 2.0) == doctest::Approx(0.001024).epsilon(1e-12));  // 2/12.5^3
  CHECK_THROWS_AS(link_gain(0.0, 3.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(link_gain(1.0, 3.0, -0.1), std::invalid_argument);
}

TEST_CASE("sampling is deterministic per seed") {
  Geometry geo;
  const auto a = sample_channels(geo, Seed{42}, 5);
  const auto b = sample_channels(geo, Seed{42}, 5);
  const auto c = sample_channels(geo, Seed{43}, 5);
  CHECK(a.h == b.h);
  CHECK(a.g == b.g);
  CHECK(a.h != c.h);
}

TEST_CASE("all sampled gains are strictly positive") {
  Geometry geo;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto ch = sample_channels(geo, Seed{s}, 4);
    for (double h : ch.h) CHECK(h > 0.0);
    for (double g : ch.g) CHECK(g > 0.0);
  }
}

TEST_CASE("fading draws have unit mean") {
  CounterRng rng(Seed{2026});
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += rng.exp_unit();
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("unit fading recovers pure path loss") {
  Geometry geo;
  geo.pb_if_distance = 25.0;
  geo.path_loss_exponent = 3.0;
  // With fade forced to 1 the gain is exactly distance^-alpha.
  CHECK(link_gain(12.5, 3.0, 1.0) == doctest::Approx(std::pow(12.5, -3.0)).epsilon(1e-14));
}

TEST_CASE("per-node distance overrides") {
  Geometry geo;
  geo.pb_node_distance = {10.0, 20.0};
  geo.node_if_distance = {15.0, 5.0};
  const auto ch = sample_channels(geo, Seed{7}, 2);
  CHECK(ch.h.size() == 2);
  Geometry bad = geo;
  bad.pb_node_distance = {10.0};
  CHECK_THROWS_AS(sample_channels(bad, Seed{7}, 2), std::invalid_argument);
}
