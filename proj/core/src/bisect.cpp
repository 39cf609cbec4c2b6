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
#include "wpbc/bisect.hpp"

#include <cmath>
#include <stdexcept>

namespace wpbc {

double bisect_decreasing(const std::function<double(double)>& f, double target,
                         double lo, double hi, double tol) {
  if (!(hi >= lo)) throw std::invalid_argument("bisect_decreasing: hi < lo");
  if (!(tol > 0.0)) throw std::invalid_argument("bisect_decreasing: tol must be > 0");

  double flo = f(lo);
  double fhi = f(hi);
  const double span = std::abs(flo) + std::abs(fhi);
  if (flo < fhi - 1e-12 * (span + 1.0))
    throw std::invalid_argument("bisect_decreasing: f is not nonincreasing on [lo, hi]");

  if (target >= flo) return lo;
  if (target <= fhi) return hi;

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm > flo + 1e-12 * (span + 1.0) || fm < fhi - 1e-12 * (span + 1.0))
      throw std::invalid_argument("bisect_decreasing: bracket violation, f is not monotone");
    if (fm >= target) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace wpbc
