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

#include <string>
#include <vector>

#include "wpbc/model.hpp"

namespace wpbc {

enum class SolveStatus { feasible, infeasible, max_iterations };

/// One row of an iteration trace: the incumbent energy after `iteration`
/// and, for the dual method, a flat snapshot of the multipliers.
struct TraceRow {
  int iteration = 0;
  double energy = 0.0;
  std::vector<double> duals;
};

/// Everything a scheme reports back: the allocation itself, its energy,
/// convergence bookkeeping, per-constraint slacks and KKT residuals.
struct SolveReport {
  std::string scheme;
  SolveStatus status = SolveStatus::infeasible;
  bool feasible = false;
  bool converged = false;
  Allocation allocation;
  double energy = 0.0;  // joules
  int iterations = 0;
  std::vector<TraceRow> trace;
  std::vector<double> kkt_residuals;
  std::vector<double> dual_objective;  // best-so-far, nondecreasing
  FeasibilityReport slacks;
  std::string note;
};

}  // namespace wpbc
