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
#include "wpbc/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace wpbc {

void Geometry::validate(std::size_t k) const {
  if (!(pb_if_distance > 0.0)) throw std::invalid_argument("Geometry: pb_if_distance must be > 0");
  if (!(path_loss_exponent > 0.0))
    throw std::invalid_argument("Geometry: path_loss_exponent must be > 0");
  if (!pb_node_distance.empty() && pb_node_distance.size() != k)
    throw std::invalid_argument("Geometry: pb_node_distance size must match node count");
  if (!node_if_distance.empty() && node_if_distance.size() != k)
    throw std::invalid_argument("Geometry: node_if_distance size must match node count");
  for (double dist : pb_node_distance)
    if (!(dist > 0.0)) throw std::invalid_argument("Geometry: distances must be > 0");
  for (double dist : node_if_distance)
    if (!(dist > 0.0)) throw std::invalid_argument("Geometry: distances must be > 0");
}

double link_gain(double distance, double exponent, double fade) {
  if (!(distance > 0.0)) throw std::invalid_argument("link_gain: distance must be > 0");
  if (fade < 0.0) throw std::invalid_argument("link_gain: fade must be >= 0");
  return fade * std::pow(distance, -exponent);
}

std::uint64_t CounterRng::next_u64() {
  // splitmix64 (Steele, Lea, Flood; public domain reference constants).
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform() {
  // 53 mantissa bits, offset by half an ulp so the result stays in (0,1).
  const std::uint64_t bits = next_u64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double CounterRng::exp_unit() { return -std::log1p(-uniform()); }

ChannelState sample_channels(const Geometry& geometry, Seed seed, std::size_t k) {
  if (k < 1) throw std::invalid_argument("sample_channels: need at least one node");
  geometry.validate(k);

  const double half = geometry.pb_if_distance / 2.0;
  auto dist_to_pb = [&](std::size_t i) {
    return geometry.pb_node_distance.empty() ? half : geometry.pb_node_distance[i];
  };
  auto dist_to_if = [&](std::size_t i) {
    return geometry.node_if_distance.empty() ? half : geometry.node_if_distance[i];
  };

  CounterRng rng(seed);
  ChannelState ch;
  ch.h.resize(k);
  ch.g.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    ch.h[i] = link_gain(dist_to_pb(i), geometry.path_loss_exponent, rng.exp_unit());
  for (std::size_t i = 0; i < k; ++i)
    ch.g[i] = link_gain(dist_to_if(i), geometry.path_loss_exponent, rng.exp_unit());
  return ch;
}

}  // namespace wpbc
