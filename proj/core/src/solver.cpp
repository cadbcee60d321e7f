/*
 * Copyright 2026 the qcs authors
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
#include "qcs/solver.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace qcs {

namespace {

double lp_norm_nonneg(const Eigen::VectorXd& s, int p) {
  const double m = s.maxCoeff();
  if (m <= 0.0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) sum += ipow(s[i] / m, p);
  return m * std::pow(sum, 1.0 / p);
}

// Euclidean projection onto the unweighted lp ball with warm-started dual
// Newton. One instance per solve keeps the previous multiplier and shrinkage
// pattern as the starting point of the next projection, which cuts the
// typical outer iteration count to one or two once the primal-dual iteration
// settles.
class LpBallProjector {
 public:
  LpBallProjector(Exponent p, double tol, int max_newton)
      : p_(p), tol_(tol), max_newton_(max_newton) {}

  Eigen::VectorXd project(const Eigen::VectorXd& v, double radius) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
      throw std::invalid_argument("project_lp_ball: radius must be >= 0");
    }
    if (radius == 0.0) return Eigen::VectorXd::Zero(v.size());
    if (p_.is_inf()) {
      return v.cwiseMax(-radius).cwiseMin(radius);
    }
    const int p = p_.value();
    if (p < 2) {
      throw std::invalid_argument("project_lp_ball: requires p in [2, inf]");
    }
    if (p == 2) {
      const double n = v.norm();
      return n <= radius ? v : Eigen::VectorXd(v * (radius / n));
    }
    // Work on the unit ball: P_{B(r)}(v) = r * P_{B(1)}(v / r).
    const Eigen::VectorXd a = v.cwiseAbs() / radius;
    if (lp_norm_nonneg(a, p) <= 1.0) return v;
    const Eigen::VectorXd s = solve_kkt(a, p);
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out[i] = radius * (v[i] < 0.0 ? -s[i] : s[i]);
    }
    return out;
  }

 private:
  // Shrinkage for a fixed multiplier: solve s + mu*p*s^{p-1} = a_i per
  // coordinate (monotone convex scalar equation) by Newton from the warm
  // start, clamped into [0, a_i].
  static void shrink(const Eigen::VectorXd& a, int p, double mu,
                     Eigen::VectorXd* s) {
    const Eigen::Index n = a.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      double si = std::min(std::max((*s)[i], 0.0), a[i]);
      for (int it = 0; it < 100; ++it) {
        const double spm2 = ipow(si, p - 2);
        const double f = si + mu * p * spm2 * si - a[i];
        const double fp = 1.0 + mu * p * (p - 1) * spm2;
        const double step = f / fp;
        double next = si - step;
        if (next < 0.0) next = 0.0;
        if (next > a[i]) next = a[i];
        const double moved = std::fabs(next - si);
        si = next;
        if (moved <= 1e-15 * (1.0 + si)) break;
      }
      (*s)[i] = si;
    }
  }

  // KKT system on the unit ball: find mu >= 0 with ||s(mu)||_p = 1.
  // Newton on mu inside an expanding bracket, midpoint fallback whenever a
  // step leaves it.
  Eigen::VectorXd solve_kkt(const Eigen::VectorXd& a, int p) {
    if (warm_s_.size() != a.size()) {
      warm_s_ = a;
      warm_mu_ = 0.0;
    }
    double mu = warm_mu_ > 0.0 ? warm_mu_ : 1e-3;
    double lo = 0.0;           // F(lo) > 0 (norm above one)
    double hi = -1.0;          // unknown until a sign change is seen
    Eigen::VectorXd s = warm_s_;

    for (int iter = 0; iter < max_newton_; ++iter) {
      shrink(a, p, mu, &s);
      const double norm = lp_norm_nonneg(s, p);
      const double F = norm - 1.0;
      if (std::fabs(F) <= tol_) {
        warm_mu_ = mu;
        warm_s_ = s;
        return s;
      }
      if (F > 0.0) {
        lo = std::max(lo, mu);
      } else {
        hi = (hi < 0.0) ? mu : std::min(hi, mu);
      }
      // dF/dmu = ||s||^{1-p} * sum s^{p-1} * ds/dmu.
      double dF = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double spm2 = ipow(s[i], p - 2);
        const double spm1 = spm2 * s[i];
        dF += spm1 * (-p * spm1 / (1.0 + mu * p * (p - 1) * spm2));
      }
      dF *= std::pow(norm, 1.0 - p);
      double next = (dF != 0.0 && std::isfinite(dF)) ? mu - F / dF : -1.0;
      const bool inside = hi < 0.0 ? (next > lo) : (next > lo && next < hi);
      if (!std::isfinite(next) || !inside) {
        next = (hi < 0.0) ? std::max(4.0 * mu, 1e-6) : 0.5 * (lo + hi);
      }
      mu = next;
    }
    throw std::runtime_error(
        "project_lp_ball: multiplier search stagnated (p = " +
        std::to_string(p) + ")");
  }

  Exponent p_;
  double tol_;
  int max_newton_;
  double warm_mu_ = 0.0;
  Eigen::VectorXd warm_s_;
};

}  // namespace

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& u, double tau) {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = std::fabs(u[i]) - tau;
    out[i] = a > 0.0 ? (u[i] < 0.0 ? -a : a) : 0.0;
  }
  return out;
}

Eigen::VectorXd project_lp_ball(const Eigen::VectorXd& v, Exponent p,
                                double radius, double tol, int max_newton) {
  LpBallProjector projector(p, tol, max_newton);
  return projector.project(v, radius);
}

Eigen::VectorXd prox_dual_fidelity(const Eigen::VectorXd& v, double sigma,
                                   const Eigen::VectorXd& y_center, Exponent p,
                                   double radius, double tol, int max_newton) {
  const Eigen::VectorXd shifted = v - sigma * y_center;
  return shifted - project_lp_ball(shifted, p, sigma * radius, tol, max_newton);
}

double operator_norm(const Eigen::MatrixXd& mat, double tol) {
  const Eigen::Index n = mat.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  x.normalize();
  double lambda = 0.0;
  for (int restart = 0; restart < 2; ++restart) {
    for (int iter = 0; iter < 10000; ++iter) {
      const Eigen::VectorXd y = mat * x;
      const double next = y.squaredNorm();  // Rayleigh quotient, ||x|| = 1
      Eigen::VectorXd z = mat.transpose() * y;
      const double zn = z.norm();
      if (zn == 0.0) break;  // x in the null space; restart below
      x = z / zn;
      if (std::fabs(next - lambda) <= tol * std::max(next, 1e-300)) {
        return std::sqrt(next);
      }
      lambda = next;
    }
    if (lambda > 0.0) return std::sqrt(lambda);
    // Deterministic restart off the null space.
    for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + static_cast<double>(i);
    x.normalize();
  }
  return std::sqrt(lambda);
}

SolveReport gbpdn_solve(const Eigen::VectorXd& y_center,
                        const Eigen::MatrixXd& sensing,
                        const WeightedConstraint& constraint,
                        const SolverConfig& cfg) {
  const Eigen::Index M = sensing.rows();
  const Eigen::Index N = sensing.cols();
  if (y_center.size() != M || constraint.weights.size() != M) {
    throw std::invalid_argument("gbpdn_solve: shape mismatch");
  }
  if (constraint.weights.minCoeff() <= 0.0) {
    throw std::invalid_argument("gbpdn_solve: weights must be positive");
  }
  if (constraint.radius < 0.0) {
    throw std::invalid_argument("gbpdn_solve: negative radius");
  }

  const Exponent p = constraint.p;
  const Eigen::VectorXd& w = constraint.weights;
  const double w_max = w.maxCoeff();

  // Row rescaling reduces the weighted ball to an unweighted one.
  const Eigen::MatrixXd Phi_w = w.asDiagonal() * sensing;
  const Eigen::VectorXd y_w = w.cwiseProduct(y_center);

  double tau = cfg.step_tau;
  double sigma = cfg.step_sigma;
  const bool auto_steps = !(tau > 0.0) || !(sigma > 0.0);
  const double phi_norm = operator_norm(sensing, 1e-6);
  const double scale = w_max * phi_norm;
  if (auto_steps) {
    if (scale <= 0.0) {
      throw std::invalid_argument("gbpdn_solve: zero sensing matrix");
    }
    tau = sigma = 0.99 / scale;
  } else if (tau * sigma * scale * scale >= 1.0) {
    throw std::invalid_argument(
        "gbpdn_solve: step sizes violate tau*sigma*||w||_inf^2*||Phi||^2 < 1");
  }

  // A zero radius (exact fit) keeps the projection well posed.
  const double eps = std::max(constraint.radius, 1e-12 * y_w.norm());
  const double diverge_at = 1e6 * y_w.norm() / std::max(scale, 1e-300);

  LpBallProjector projector(p, cfg.projection_tol, cfg.projection_max_newton);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd u_bar = u;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(M);

  SolveReport report;
  report.status = "max_iters";
  double rel = 0.0;

  auto fidelity = [&](const Eigen::VectorXd& est) {
    return weighted_lp_norm(y_center - sensing * est, w, p) - eps;
  };

  int it = 0;
  for (it = 1; it <= cfg.max_iters; ++it) {
    // Dual ascent on the fidelity ball.
    const Eigen::VectorXd t = v + sigma * (Phi_w * u_bar) - sigma * y_w;
    v = t - projector.project(t, sigma * eps);
    // Primal descent through the l1 prox, then the extragradient point.
    const Eigen::VectorXd u_next =
        soft_threshold(u - tau * (Phi_w.transpose() * v), tau);
    u_bar = u_next + cfg.theta * (u_next - u);
    rel = (u_next - u).norm() / std::max(u_next.norm(), 1e-300);
    u = u_next;

    if (cfg.trace != nullptr) {
      char line[160];
      std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", it, rel,
                    fidelity(u), u.lpNorm<1>());
      *cfg.trace << line;
    }
    if (u.norm() > diverge_at) {
      report.status = "diverged";
      break;
    }
    if (rel < cfg.rel_change_tol &&
        fidelity(u) <= cfg.feasibility_slack_rel * eps) {
      report.status = "converged";
      break;
    }
  }

  report.estimate = u;
  report.iterations = std::min(it, cfg.max_iters);
  report.final_rel_change = rel;
  report.fidelity_residual = fidelity(u);
  report.objective = u.lpNorm<1>();
  report.converged = report.status == "converged";
  return report;
}

}  // namespace qcs
