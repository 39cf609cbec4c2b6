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

#include <optional>

#include "wpbc/model.hpp"

namespace wpbc {

enum class OracleMode { dynamic_power, static_power };

struct OracleOptions {
  int resolution = 64;  // grid points per power/reflection axis, >= 16
  int levels = 2;       // 1 = single pass, 2 = one refinement around the incumbent
  double feasibility_rel_tol = 1e-3;
  std::optional<double> fixed_power;  // pin the shared power (static mode)
  int threads = 0;                    // 0 = hardware concurrency
};

struct OracleResult {
  bool feasible = false;
  Allocation allocation;
  double energy = 0.0;
};

/// Brute-force minimizer for desk-scale instances (K <= 2), the ground
/// truth the iterative schemes are validated against. Powers and reflection
/// coefficients are scanned on uniform nested grids; for each grid point the
/// slot durations follow from the constraint structure itself (throughput
/// rows tight, charging slot at the smallest energy-covering length), which
/// is exact at the optimum and keeps the scan tractable. The refinement
/// level shrinks the search box fourfold around the incumbent.
OracleResult grid_search(const NetworkInstance& inst, OracleMode mode,
                         const OracleOptions& opts = {});

/// Spec-style convenience overload.
OracleResult grid_search(const NetworkInstance& inst, int resolution, OracleMode mode);

}  // namespace wpbc
