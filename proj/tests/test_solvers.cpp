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

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "wpbc/bisect.hpp"
#include "wpbc/convex.hpp"
#include "wpbc/lp.hpp"

using namespace wpbc;

// ---------------------------------------------------------------------------
// bisect_decreasing

TEST_CASE("bisection inverts a decreasing function") {
  auto f = [](double x) { return 1.0 / ((1.0 + x) * (1.0 + x)); };
  const double x = bisect_decreasing(f, 0.25, 0.0, 10.0, 1e-12);
  CHECK(x == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("bisection clamps at the bracket ends") {
  auto f = [](double x) { return 5.0 - x; };
  CHECK(bisect_decreasing(f, 10.0, 0.0, 4.0, 1e-12) == 0.0);   // target >= f(lo)
  CHECK(bisect_decreasing(f, 5.0, 0.0, 4.0, 1e-12) == 0.0);    // f(x) = c at target c
  CHECK(bisect_decreasing(f, -10.0, 0.0, 4.0, 1e-12) == 4.0);  // target <= f(hi)
}

TEST_CASE("bisection rejects non-monotone input") {
  auto rising = [](double x) { return x; };
  CHECK_THROWS_AS(bisect_decreasing(rising, 0.5, 0.0, 1.0, 1e-9), std::invalid_argument);
  auto vee = [](double x) { return std::abs(x - 0.6); };
  CHECK_THROWS_AS(bisect_decreasing(vee, 0.5, 0.0, 1.0, 1e-9), std::invalid_argument);
}

TEST_CASE("bisection terminates in the expected number of halvings") {
  int calls = 0;
  auto f = [&](double x) {
    ++calls;
    return -x;
  };
  bisect_decreasing(f, -0.37, 0.0, 1.0, 1e-6);
  // ceil(log2(1/1e-6)) = 20 midpoints plus the two endpoint probes.
  CHECK(calls <= 23);
}

// ---------------------------------------------------------------------------
// solve_lp

namespace {

LpProblem box_problem(int n) {
  LpProblem p;
  p.c = Eigen::VectorXd::Zero(n);
  p.a = Eigen::MatrixXd::Zero(0, n);
  p.b = Eigen::VectorXd::Zero(0);
  p.lower = Eigen::VectorXd::Zero(n);
  p.upper = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  return p;
}

// Exhaustive vertex enumeration for tiny LPs: every choice of n active
// constraints among rows and bounds, solved exactly and checked for
// feasibility. Independent of the simplex code path.
struct VertexOracle {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
};

VertexOracle enumerate_vertices(const LpProblem& p) {
  const int n = static_cast<int>(p.c.size());
  const int m = static_cast<int>(p.b.size());
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int i = 0; i < m; ++i) {
    rows.push_back(p.a.row(i));
    rhs.push_back(p.b(i));
  }
  for (int j = 0; j < n; ++j) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    r(j) = -1.0;
    rows.push_back(r);
    rhs.push_back(-p.lower(j));
    if (std::isfinite(p.upper(j))) {
      r(j) = 1.0;
      rows.push_back(r);
      rhs.push_back(p.upper(j));
    }
  }
  const int total = static_cast<int>(rows.size());
  VertexOracle out;
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd a(n, n);
      Eigen::VectorXd b(n);
      for (int i = 0; i < n; ++i) {
        a.row(i) = rows[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])];
        b(i) = rhs[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd x = lu.solve(b);
      for (int i = 0; i < total; ++i)
        if (rows[static_cast<std::size_t>(i)].dot(x) > rhs[static_cast<std::size_t>(i)] + 1e-7)
          return;
      const double obj = p.c.dot(x);
      if (out.status != LpStatus::optimal || obj < out.objective) {
        out.status = LpStatus::optimal;
        out.objective = obj;
      }
      return;
    }
    for (int i = start; i < total; ++i) {
      pick[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace

TEST_CASE("lp simple bounds") {
  LpProblem p = box_problem(1);
  p.c << 1.0;
  p.lower << 3.0;
  p.upper << 10.0;
  const auto r = solve_lp(p);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("lp contradictory bounds are infeasible") {
  LpProblem p = box_problem(2);
  p.c << 1.0, 1.0;
  p.a = Eigen::MatrixXd(2, 2);
  p.a << 1.0, 0.0, -1.0, 0.0;
  p.b = Eigen::VectorXd(2);
  p.b << 1.0, -2.0;  // x0 <= 1 and x0 >= 2
  const auto r = solve_lp(p);
  CHECK(r.status == LpStatus::infeasible);
}

TEST_CASE("lp unbounded detection") {
  LpProblem p = box_problem(1);
  p.c << -1.0;  // minimize -x with x unbounded above
  const auto r = solve_lp(p);
  CHECK(r.status == LpStatus::unbounded);
}

TEST_CASE("lp matches vertex enumeration on random instances") {
  std::mt19937_64 gen(20260809);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> nd(2, 6), md(1, 8);
  int optimal_seen = 0, infeasible_seen = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = nd(gen), m = md(gen);
    LpProblem p;
    p.c.resize(n);
    for (int j = 0; j < n; ++j) p.c(j) = coef(gen);
    p.a.resize(m, n);
    p.b.resize(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) p.a(i, j) = coef(gen);
      p.b(i) = coef(gen);
    }
    p.lower = Eigen::VectorXd::Constant(n, -3.0);
    p.upper = Eigen::VectorXd::Constant(n, 3.0);

    const auto lp = solve_lp(p);
    const auto oracle = enumerate_vertices(p);
    REQUIRE(lp.status == oracle.status);
    if (lp.status == LpStatus::optimal) {
      ++optimal_seen;
      CHECK(lp.objective ==
            doctest::Approx(oracle.objective).epsilon(1e-8));
    } else {
      ++infeasible_seen;
    }
  }
  CHECK(optimal_seen > 20);
  CHECK(infeasible_seen > 5);
}

// ---------------------------------------------------------------------------
// solve_smooth_convex

namespace {

GradFn quadratic(const Eigen::MatrixXd& q, const Eigen::VectorXd& b) {
  return [q, b](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    if (grad) *grad = q * x + b;
    return 0.5 * x.dot(q * x) + b.dot(x);
  };
}

}  // namespace

TEST_CASE("convex: min x^2 subject to x >= 1") {
  SmoothConvexProgram p;
  p.n = 1;
  p.objective = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) (*g)(0) = 2.0 * x(0);
    return x(0) * x(0);
  };
  p.lower = Eigen::VectorXd::Constant(1, 1.0);
  p.upper = Eigen::VectorXd::Constant(1, 50.0);
  SolverOptions opts;
  opts.tolerance = 1e-8;
  const auto r = solve_smooth_convex(p, opts);
  REQUIRE(r.status == ConvexStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("convex: min -log(x) + x has its stationary point at 1") {
  SmoothConvexProgram p;
  p.n = 1;
  p.objective = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (x(0) <= 0.0) return std::numeric_limits<double>::infinity();
    if (g) (*g)(0) = -1.0 / x(0) + 1.0;
    return -std::log(x(0)) + x(0);
  };
  p.lower = Eigen::VectorXd::Constant(1, 1e-12);
  p.upper = Eigen::VectorXd::Constant(1, 100.0);
  p.start = Eigen::VectorXd::Constant(1, 5.0);
  const auto r = solve_smooth_convex(p);
  REQUIRE(r.status == ConvexStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("convex: infeasible constraints are detected by phase one") {
  SmoothConvexProgram p;
  p.n = 1;
  p.objective = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) (*g)(0) = 1.0;
    return x(0);
  };
  // x <= -1 and x >= 1 simultaneously.
  p.constraints.push_back([](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) (*g)(0) = 1.0;
    return x(0) + 1.0;
  });
  p.constraints.push_back([](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) (*g)(0) = -1.0;
    return 1.0 - x(0);
  });
  p.lower = Eigen::VectorXd::Constant(1, -10.0);
  p.upper = Eigen::VectorXd::Constant(1, 10.0);
  const auto r = solve_smooth_convex(p);
  CHECK(r.status == ConvexStatus::infeasible);
}

TEST_CASE("convex battery: random QPs satisfy KKT at 1e-6") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 4);  // 2..5
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = u(gen);
    Eigen::MatrixXd q = m.transpose() * m + 0.5 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = u(gen);

    SmoothConvexProgram p;
    p.n = n;
    p.objective = quadratic(q, b);
    // A couple of random affine cuts through the box.
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd a(n);
      for (int i = 0; i < n; ++i) a(i) = u(gen);
      const double rhs = 1.0 + std::abs(u(gen));
      p.constraints.push_back([a, rhs](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        if (g) *g = a;
        return a.dot(x) - rhs;
      });
    }
    p.lower = Eigen::VectorXd::Constant(n, -4.0);
    p.upper = Eigen::VectorXd::Constant(n, 4.0);

    SolverOptions opts;
    opts.tolerance = 1e-8;
    const auto r = solve_smooth_convex(p, opts);
    REQUIRE(r.status == ConvexStatus::optimal);
    CHECK(r.kkt_stationarity <= 1e-6);
    CHECK(r.kkt_complementarity <= 1e-6);
    CHECK(r.max_violation <= 1e-9);

    // Cross-check the constraint gradients against central differences.
    for (const auto& g : p.constraints) {
      Eigen::VectorXd grad(n);
      g(r.x, &grad);
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd xp = r.x, xm = r.x;
        const double h = 1e-6 * (1.0 + std::abs(r.x(j)));
        xp(j) += h;
        xm(j) -= h;
        const double fd = (g(xp, nullptr) - g(xm, nullptr)) / (2.0 * h);
        CHECK(grad(j) == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("convex: equality-like active constraint matches the QP solution") {
  // min (x-2)^2 + (y+1)^2 s.t. x + y <= 0 -- optimum on the cut at (1.5, -1.5).
  Eigen::MatrixXd q = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd b(2);
  b << -4.0, 2.0;
  SmoothConvexProgram p;
  p.n = 2;
  p.objective = quadratic(q, b);
  p.constraints.push_back([](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) {
      g->resize(2);
      (*g) << 1.0, 1.0;
    }
    return x(0) + x(1);
  });
  p.lower = Eigen::VectorXd::Constant(2, -10.0);
  p.upper = Eigen::VectorXd::Constant(2, 10.0);
  const auto r = solve_smooth_convex(p);
  REQUIRE(r.status == ConvexStatus::optimal);
  CHECK(r.x(0) == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(r.x(1) == doctest::Approx(-1.5).epsilon(1e-5));
}
