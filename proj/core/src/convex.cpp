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
#include "wpbc/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wpbc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLineSearchAlpha = 0.3;
constexpr double kLineSearchBeta = 0.8;

struct Barrier {
  const SmoothConvexProgram& p;
  double t;

  int constraint_count() const { return static_cast<int>(p.constraints.size()); }

  int barrier_terms() const {
    int m = constraint_count();
    for (int j = 0; j < p.n; ++j) {
      if (std::isfinite(p.lower(j))) ++m;
      if (std::isfinite(p.upper(j))) ++m;
    }
    return m;
  }

  bool strictly_feasible(const Eigen::VectorXd& x, double margin = 0.0) const {
    for (int j = 0; j < p.n; ++j) {
      if (std::isfinite(p.lower(j)) && !(x(j) > p.lower(j) + margin)) return false;
      if (std::isfinite(p.upper(j)) && !(x(j) < p.upper(j) - margin)) return false;
    }
    for (const auto& g : p.constraints) {
      const double gv = g(x, nullptr);
      if (!std::isfinite(gv) || !(gv < -margin)) return false;
    }
    return true;
  }

  // Centering objective f0(x) + Phi(x)/t, kept in f0 scale so that line
  // search comparisons and Newton decrements stay meaningful for large t.
  // Its gradient is exactly the dual-feasibility residual with the barrier
  // multipliers 1/(t * slack). Returns +inf outside the domain.
  double value(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    if (grad) grad->setZero(p.n);
    Eigen::VectorXd gbuf(p.n);
    double f = p.objective(x, grad ? &gbuf : nullptr);
    if (!std::isfinite(f)) return kInf;
    double psi = f;
    if (grad) *grad = gbuf;
    const double inv_t = 1.0 / t;

    for (const auto& g : p.constraints) {
      const double gv = g(x, grad ? &gbuf : nullptr);
      if (!std::isfinite(gv) || gv >= 0.0) return kInf;
      psi -= inv_t * std::log(-gv);
      if (grad) *grad += inv_t * gbuf / (-gv);
    }
    for (int j = 0; j < p.n; ++j) {
      if (std::isfinite(p.lower(j))) {
        const double s = x(j) - p.lower(j);
        if (s <= 0.0) return kInf;
        psi -= inv_t * std::log(s);
        if (grad) (*grad)(j) -= inv_t / s;
      }
      if (std::isfinite(p.upper(j))) {
        const double s = p.upper(j) - x(j);
        if (s <= 0.0) return kInf;
        psi -= inv_t * std::log(s);
        if (grad) (*grad)(j) += inv_t / s;
      }
    }
    return psi;
  }

  // Central-difference Hessian of the barrier gradient, symmetrized. The
  // probe step shrinks until both probes stay inside the domain.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& grad_at_x) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p.n, p.n);
    Eigen::VectorXd gp(p.n), gm(p.n);
    for (int j = 0; j < p.n; ++j) {
      double step = 1e-7 * (1.0 + std::abs(x(j)));
      bool ok = false;
      for (int attempt = 0; attempt < 60; ++attempt) {
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += step;
        xm(j) -= step;
        if (std::isfinite(value(xp, &gp)) && std::isfinite(value(xm, &gm))) {
          h.col(j) = (gp - gm) / (2.0 * step);
          ok = true;
          break;
        }
        step *= 0.5;
      }
      if (!ok) h.col(j) = grad_at_x;  // degenerate; damping will take over
    }
    return 0.5 * (h + h.transpose());
  }
};

// Minimizes the barrier function from a strictly feasible x with damped
// Newton steps; stops on the Newton decrement or a stationarity target.
int newton_minimize(const Barrier& barrier, Eigen::VectorXd& x, double grad_target,
                    int max_steps) {
  int steps = 0;
  for (; steps < max_steps; ++steps) {
    Eigen::VectorXd grad(barrier.p.n);
    const double psi = barrier.value(x, &grad);
    if (!std::isfinite(psi)) throw std::runtime_error("solve_smooth_convex: left the domain");
    if (grad.lpNorm<Eigen::Infinity>() <= grad_target) break;

    Eigen::MatrixXd h = barrier.hessian(x, grad);
    Eigen::VectorXd dir;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd hr = h;
      if (ridge > 0.0) hr.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hr);
      if (ldlt.info() == Eigen::Success) {
        dir = ldlt.solve(-grad);
        if (dir.allFinite() && grad.dot(dir) < 0.0) break;
      }
      ridge = ridge == 0.0 ? 1e-10 * (1.0 + h.diagonal().cwiseAbs().maxCoeff()) : ridge * 100.0;
      dir.setZero();
    }
    if (dir.isZero(0.0)) break;

    const double slope = grad.dot(dir);
    const double decrement = -slope;
    if (decrement * 0.5 <= 1e-16 * (1.0 + std::abs(psi))) break;

    // Fraction-to-boundary cap against the box, then halve until inside the
    // domain of the nonlinear constraints; Armijo backtracking from there.
    double step = 1.0;
    for (int j = 0; j < barrier.p.n; ++j) {
      if (dir(j) > 0.0 && std::isfinite(barrier.p.upper(j)))
        step = std::min(step, 0.995 * (barrier.p.upper(j) - x(j)) / dir(j));
      else if (dir(j) < 0.0 && std::isfinite(barrier.p.lower(j)))
        step = std::min(step, 0.995 * (barrier.p.lower(j) - x(j)) / dir(j));
    }
    for (int guard = 0; guard < 200 && !std::isfinite(barrier.value(x + step * dir, nullptr));
         ++guard)
      step *= 0.5;

    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd cand = x + step * dir;
      const double val = barrier.value(cand, nullptr);
      if (std::isfinite(val) && val <= psi + kLineSearchAlpha * step * slope) {
        x = cand;
        moved = true;
        break;
      }
      step *= kLineSearchBeta;
    }
    if (!moved || step * dir.lpNorm<Eigen::Infinity>() <=
                      1e-16 * (1.0 + x.lpNorm<Eigen::Infinity>()))
      break;
  }
  return steps;
}

// One stationarity column per constraint or finite bound: the gradient of
// the <= 0 form together with its slack at x.
struct Column {
  Eigen::VectorXd grad;
  double slack;       // -g_i(x), or distance to the bound
  int constraint_id;  // -1 for box bounds
  int bound_var = -1; // variable index for box columns
  double bound_sign = 0.0;
};

struct Certificate {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double violation = 0.0;
  Eigen::VectorXd duals;     // per nonlinear constraint
  std::vector<Column> cols;  // active columns with fitted multipliers
  Eigen::VectorXd lambda;    // multipliers per active column
};

std::vector<Column> stationarity_columns(const SmoothConvexProgram& p,
                                         const Eigen::VectorXd& x, double* viol) {
  std::vector<Column> cols;
  Eigen::VectorXd gbuf(p.n);
  if (viol) *viol = 0.0;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const double gv = p.constraints[i](x, &gbuf);
    if (viol) *viol = std::max(*viol, gv);
    cols.push_back({gbuf, std::max(-gv, 0.0), static_cast<int>(i), -1, 0.0});
  }
  for (int j = 0; j < p.n; ++j) {
    if (std::isfinite(p.lower(j))) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(p.n);
      e(j) = -1.0;
      cols.push_back({e, x(j) - p.lower(j), -1, j, -1.0});
    }
    if (std::isfinite(p.upper(j))) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(p.n);
      e(j) = 1.0;
      cols.push_back({e, p.upper(j) - x(j), -1, j, 1.0});
    }
  }
  return cols;
}

// Nonnegative least-squares fit of the stationarity condition over the
// near-active columns, pruning negative multipliers. The barrier multipliers
// 1/(t * slack) are only estimates at a finitely-centered point; the fitted
// ones certify much tighter.
Certificate certify(const SmoothConvexProgram& p, const Eigen::VectorXd& x,
                    const SolverOptions& opts) {
  Certificate cert;
  cert.duals.setZero(static_cast<int>(p.constraints.size()));
  Eigen::VectorXd grad0(p.n);
  p.objective(x, &grad0);

  std::vector<Column> cols = stationarity_columns(p, x, &cert.violation);
  const double active_tol = std::sqrt(opts.tolerance) * (1.0 + x.lpNorm<Eigen::Infinity>());
  std::vector<int> active;
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i].slack <= active_tol) active.push_back(static_cast<int>(i));

  Eigen::VectorXd lambda;
  for (int prune = 0; prune <= static_cast<int>(cols.size()); ++prune) {
    if (active.empty()) {
      lambda.resize(0);
      break;
    }
    Eigen::MatrixXd a(p.n, static_cast<int>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i)
      a.col(static_cast<int>(i)) = cols[static_cast<std::size_t>(active[i])].grad;
    lambda = a.colPivHouseholderQr().solve(-grad0);
    int worst = -1;
    double worst_val = -1e-12;
    for (int i = 0; i < lambda.size(); ++i)
      if (lambda(i) < worst_val) {
        worst_val = lambda(i);
        worst = i;
      }
    if (worst < 0) break;
    active.erase(active.begin() + worst);
  }

  Eigen::VectorXd station = grad0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const Column& c = cols[static_cast<std::size_t>(active[i])];
    const double lam = std::max(0.0, lambda(static_cast<int>(i)));
    station += lam * c.grad;
    cert.complementarity = std::max(cert.complementarity, lam * c.slack);
    if (c.constraint_id >= 0) cert.duals(c.constraint_id) = lam;
    cert.cols.push_back(c);
  }
  cert.lambda.resize(static_cast<int>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i)
    cert.lambda(static_cast<int>(i)) = std::max(0.0, lambda(static_cast<int>(i)));
  cert.stationarity = station.lpNorm<Eigen::Infinity>();
  return cert;
}

// Newton iterations on the active-set KKT system
//   grad f0(x) + sum_i lambda_i grad g_i(x) = 0,  g_i(x) = 0  (i active),
// with the Lagrangian Hessian formed by central differences of gradients.
// Returns an empty vector when the polish cannot be applied.
Eigen::VectorXd crossover_polish(const SmoothConvexProgram& p, Eigen::VectorXd x,
                                 const Certificate& cert, const SolverOptions& opts) {
  const int na = static_cast<int>(cert.cols.size());
  Eigen::VectorXd lambda = cert.lambda;

  auto eval_cols = [&](const Eigen::VectorXd& xx, std::vector<Column>& out) -> bool {
    double viol;
    out = stationarity_columns(p, xx, &viol);
    for (const Column& c : out)
      if (!std::isfinite(c.slack)) return false;
    return true;
  };

  auto grad_lagrangian = [&](const Eigen::VectorXd& xx, Eigen::VectorXd* out) -> bool {
    Eigen::VectorXd g(p.n), gbuf(p.n);
    const double f = p.objective(xx, &g);
    if (!std::isfinite(f)) return false;
    for (int i = 0; i < na; ++i) {
      const Column& c = cert.cols[static_cast<std::size_t>(i)];
      if (c.constraint_id >= 0) {
        const double gv = p.constraints[static_cast<std::size_t>(c.constraint_id)](xx, &gbuf);
        if (!std::isfinite(gv)) return false;
        g += lambda(i) * gbuf;
      } else {
        g(c.bound_var) += lambda(i) * c.bound_sign;
      }
    }
    *out = g;
    return true;
  };

  for (int iter = 0; iter < 6; ++iter) {
    Eigen::VectorXd gl(p.n);
    if (!grad_lagrangian(x, &gl)) return {};

    Eigen::MatrixXd a(p.n, na);
    Eigen::VectorXd gvals(na);
    Eigen::VectorXd gbuf(p.n);
    for (int i = 0; i < na; ++i) {
      const Column& c = cert.cols[static_cast<std::size_t>(i)];
      if (c.constraint_id >= 0) {
        gvals(i) = p.constraints[static_cast<std::size_t>(c.constraint_id)](x, &gbuf);
        a.col(i) = gbuf;
      } else {
        gvals(i) = c.bound_sign > 0 ? x(c.bound_var) - p.upper(c.bound_var)
                                    : p.lower(c.bound_var) - x(c.bound_var);
        a.col(i).setZero();
        a(c.bound_var, i) = c.bound_sign;
      }
    }

    const double res = std::max(gl.lpNorm<Eigen::Infinity>(),
                                na > 0 ? gvals.lpNorm<Eigen::Infinity>() : 0.0);
    if (res <= 1e-13 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;

    // Lagrangian Hessian by central differences of grad_lagrangian.
    Eigen::MatrixXd h(p.n, p.n);
    Eigen::VectorXd gp(p.n), gm(p.n);
    bool ok = true;
    for (int j = 0; j < p.n && ok; ++j) {
      double step = 1e-7 * (1.0 + std::abs(x(j)));
      bool col_ok = false;
      for (int attempt = 0; attempt < 50; ++attempt) {
        Eigen::VectorXd xpp = x, xmm = x;
        xpp(j) += step;
        xmm(j) -= step;
        if (grad_lagrangian(xpp, &gp) && grad_lagrangian(xmm, &gm)) {
          h.col(j) = (gp - gm) / (2.0 * step);
          col_ok = true;
          break;
        }
        step *= 0.5;
      }
      ok = col_ok;
    }
    if (!ok) return {};
    h = 0.5 * (h + h.transpose());

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(p.n + na, p.n + na);
    kkt.topLeftCorner(p.n, p.n) = h;
    if (na > 0) {
      kkt.topRightCorner(p.n, na) = a;
      kkt.bottomLeftCorner(na, p.n) = a.transpose();
    }
    Eigen::VectorXd rhs(p.n + na);
    rhs.head(p.n) = -gl;
    if (na > 0) rhs.tail(na) = -gvals;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) return {};
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (!delta.allFinite()) return {};

    double step = 1.0;
    std::vector<Column> probe;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::VectorXd cand = x + step * delta.head(p.n);
      if (eval_cols(cand, probe)) break;
      step *= 0.5;
    }
    x += step * delta.head(p.n);
    if (na > 0) lambda += step * delta.tail(na);
    for (int i = 0; i < na; ++i) lambda(i) = std::max(0.0, lambda(i));
  }
  return x;
}

Eigen::VectorXd interior_box_point(const SmoothConvexProgram& p) {
  Eigen::VectorXd x(p.n);
  for (int j = 0; j < p.n; ++j) {
    const bool lo = std::isfinite(p.lower(j));
    const bool hi = std::isfinite(p.upper(j));
    if (lo && hi)
      x(j) = 0.5 * (p.lower(j) + p.upper(j));
    else if (lo)
      x(j) = p.lower(j) + 1.0;
    else if (hi)
      x(j) = p.upper(j) - 1.0;
    else
      x(j) = 0.0;
  }
  return x;
}

// Phase I: minimize the worst violation s over (x, s) with g_i(x) <= s.
// Succeeds as soon as a strictly negative s is reached.
std::optional<Eigen::VectorXd> phase_one(const SmoothConvexProgram& p,
                                         const SolverOptions& opts, int* newton_steps) {
  SmoothConvexProgram aug;
  aug.n = p.n + 1;
  aug.lower.resize(aug.n);
  aug.upper.resize(aug.n);
  aug.lower.head(p.n) = p.lower;
  aug.upper.head(p.n) = p.upper;

  Eigen::VectorXd x0(aug.n);
  x0.head(p.n) = interior_box_point(p);
  double worst = -kInf;
  for (const auto& g : p.constraints) {
    const double gv = g(x0.head(p.n), nullptr);
    if (!std::isfinite(gv)) return std::nullopt;
    worst = std::max(worst, gv);
  }
  const double scale = 1.0 + std::abs(worst);
  x0(p.n) = worst + scale;
  aug.lower(p.n) = -1e3 * scale;
  aug.upper(p.n) = kInf;

  aug.objective = [n = p.n](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    if (grad) {
      grad->setZero(n + 1);
      (*grad)(n) = 1.0;
    }
    return z(n);
  };
  for (const auto& g : p.constraints) {
    aug.constraints.push_back([&g, n = p.n](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
      Eigen::VectorXd gx(n);
      const double gv = g(z.head(n), grad ? &gx : nullptr);
      if (grad) {
        grad->setZero(n + 1);
        grad->head(n) = gx;
        (*grad)(n) = -1.0;
      }
      return gv - z(n);
    });
  }

  Barrier barrier{aug, opts.barrier_t0};
  Eigen::VectorXd z = x0;
  const int m = std::max(1, barrier.barrier_terms());
  const double found = -std::max(opts.tolerance, 1e-9) * scale;
  for (int stage = 0; stage < 64; ++stage) {
    *newton_steps += newton_minimize(barrier, z, 0.1 * opts.tolerance * scale,
                                     opts.max_iterations);
    if (z(p.n) < found) {
      Eigen::VectorXd x = z.head(p.n);
      return x;
    }
    if (static_cast<double>(m) / barrier.t <= opts.tolerance * scale) break;
    barrier.t *= opts.barrier_mu;
  }
  if (z(p.n) < found) {
    Eigen::VectorXd x = z.head(p.n);
    return x;
  }
  return std::nullopt;  // optimum not strictly negative: no usable interior
}

}  // namespace

ConvexResult solve_smooth_convex(const SmoothConvexProgram& program, const SolverOptions& opts) {
  if (program.n <= 0) throw std::invalid_argument("solve_smooth_convex: empty program");
  if (program.lower.size() != program.n || program.upper.size() != program.n)
    throw std::invalid_argument("solve_smooth_convex: bound dimensions mismatch");
  if (!program.objective) throw std::invalid_argument("solve_smooth_convex: missing objective");

  ConvexResult result;
  Barrier barrier{program, opts.barrier_t0};

  Eigen::VectorXd x;
  if (program.start && program.start->size() == program.n &&
      barrier.strictly_feasible(*program.start)) {
    x = *program.start;
  } else if (program.constraints.empty() && barrier.strictly_feasible(interior_box_point(program))) {
    x = interior_box_point(program);
  } else {
    auto x0 = phase_one(program, opts, &result.newton_steps);
    if (!x0) {
      result.status = ConvexStatus::infeasible;
      return result;
    }
    x = *x0;
  }

  Eigen::VectorXd grad_f0(program.n);
  program.objective(x, &grad_f0);
  const double obj_scale = 1.0 + grad_f0.lpNorm<Eigen::Infinity>();

  const int m = barrier.barrier_terms();
  bool converged = m == 0;
  for (int stage = 0; stage < 64; ++stage) {
    result.newton_steps +=
        newton_minimize(barrier, x, 0.1 * opts.tolerance * obj_scale, opts.max_iterations);
    if (m == 0 || static_cast<double>(m) / barrier.t <= opts.tolerance * obj_scale) {
      converged = true;
      break;
    }
    barrier.t *= opts.barrier_mu;
  }

  // KKT certificate at the barrier point, then an active-set crossover
  // polish: Newton on the KKT system of the identified active set removes
  // the residual centering error that the plain barrier leaves behind in
  // double precision. The polished point is kept only when it stays
  // feasible and certifies better.
  Certificate cert = certify(program, x, opts);
  const Eigen::VectorXd xp = crossover_polish(program, x, cert, opts);
  if (xp.size() == program.n) {
    Certificate cert2 = certify(program, xp, opts);
    if (cert2.violation <= std::max(cert.violation, 1e-12) &&
        cert2.stationarity < cert.stationarity) {
      x = xp;
      cert = std::move(cert2);
    }
  }

  result.x = x;
  result.objective = program.objective(x, nullptr);
  result.duals = cert.duals;
  result.kkt_stationarity = cert.stationarity;
  result.kkt_complementarity = cert.complementarity;
  result.max_violation = cert.violation;
  result.status = converged ? ConvexStatus::optimal : ConvexStatus::max_iterations;
  return result;
}

}  // namespace wpbc
