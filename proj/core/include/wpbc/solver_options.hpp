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

namespace wpbc {

/// Shared knobs for the in-house solvers.
struct SolverOptions {
  double tolerance = 1e-8;   // KKT / convergence tolerance
  int max_iterations = 400;  // Newton steps (barrier) or pivots budget scale
  double barrier_t0 = 1.0;   // initial barrier weight
  double barrier_mu = 10.0;  // barrier growth factor, > 1
  double pivot_tol = 1e-9;   // LP pivot tolerance
};

}  // namespace wpbc
