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

#include <functional>

namespace wpbc {

/// Solves f(x) = target on [lo, hi] for a nonincreasing f by bisection,
/// halving the bracket until its width is <= tol.
///
/// Boundary contract: returns lo when target >= f(lo) and hi when
/// target <= f(hi); callers that cannot rule those cases out get the
/// clamped endpoint instead of an error. Throws std::invalid_argument on a
/// bad bracket or when f(lo) < f(hi) beyond rounding (monotonicity
/// violation).
double bisect_decreasing(const std::function<double(double)>& f, double target,
                         double lo, double hi, double tol);

}  // namespace wpbc
