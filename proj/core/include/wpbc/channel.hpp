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

#include <cstdint>
#include <vector>

#include "wpbc/model.hpp"

namespace wpbc {

/// Node layout. When the per-node distance vectors are empty every node sits
/// at the midpoint of the beacon-receiver segment (distance r/2 to each end).
struct Geometry {
  double pb_if_distance = 25.0;             // meters
  std::vector<double> pb_node_distance;     // meters, empty => r/2 for all
  std::vector<double> node_if_distance;     // meters, empty => r/2 for all
  double path_loss_exponent = 3.0;

  void validate(std::size_t k) const;
};

struct Seed {
  std::uint64_t value = 0;
};

/// fade * distance^(-exponent).
double link_gain(double distance, double exponent, double fade);

/// Deterministic counter-based stream: the canonical splitmix64 sequence
/// seeded with `seed`, mapped to doubles. Identical seeds produce identical
/// streams on every platform; draws never return exactly 0 or 1.
class CounterRng {
 public:
  explicit CounterRng(Seed seed) : state_(seed.value) {}

  std::uint64_t next_u64();
  double uniform();   // strictly inside (0,1)
  double exp_unit();  // unit-mean exponential, -log(1-u)

 private:
  std::uint64_t state_;
};

/// Draws per-link Rayleigh fading powers from the unit-mean exponential
/// distribution and combines them with path loss. Draw order is fixed:
/// h_1..h_K first, then g_1..g_K.
ChannelState sample_channels(const Geometry& geometry, Seed seed, std::size_t k);

}  // namespace wpbc
