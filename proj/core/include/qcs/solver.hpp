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
#ifndef QCS_SOLVER_HPP_
#define QCS_SOLVER_HPP_

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "qcs/exponent.hpp"
#include "qcs/wnorm.hpp"

namespace qcs {

// Primal-dual solver configuration. Step sizes <= 0 select the AUTO rule
// tau = sigma = 0.99 / (||w||_inf * ||Phi||), which keeps the contraction
// product tau * sigma * ||w||_inf^2 * ||Phi||^2 at 0.9801 < 1; explicit
// steps must satisfy that product bound themselves.
struct SolverConfig {
  int max_iters = 2000;
  double rel_change_tol = 1e-6;
  double theta = 1.0;  // extragradient relaxation in [0, 1]
  double step_sigma = 0.0;
  double step_tau = 0.0;
  double projection_tol = 1e-10;
  int projection_max_newton = 200;
  // A candidate stop (relative change below tol) is accepted only once the
  // iterate is feasible up to this relative slack, so reported solutions
  // respect the fidelity ball to 1e-5 * radius by construction.
  double feasibility_slack_rel = 1e-5;
  // Optional per-iteration CSV trace "iter,rel_change,fidelity_residual,
  // objective" (adds one matrix-vector product per logged iteration).
  std::ostream* trace = nullptr;
};

struct SolveReport {
  Eigen::VectorXd estimate;
  int iterations = 0;
  double final_rel_change = 0.0;
  // ||y - Phi x*||_{p,w} - eps; positive values are infeasible.
  double fidelity_residual = 0.0;
  double objective = 0.0;  // ||x*||_1
  bool converged = false;
  std::string status;  // "converged", "max_iters", or "diverged"
};

// Componentwise sign(u) * max(|u| - tau, 0).
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& u, double tau);

// Euclidean projection onto { z : ||z||_p <= radius } for p in [2, inf].
// Closed forms at p = 2 (radial) and p = inf (clamp); integer 2 < p < inf
// solves the KKT system by Newton on the scalar dual multiplier with a
// bracketed-bisection fallback, to |  ||z||_p - radius | <= tol * radius.
Eigen::VectorXd project_lp_ball(const Eigen::VectorXd& v, Exponent p,
                                double radius, double tol = 1e-10,
                                int max_newton = 200);

// prox_{sigma g*}(v) for g the indicator of the fidelity ball centered at
// y_center, through the Moreau identity:
// v - sigma*y - proj_{B_p(sigma * radius)}(v - sigma*y).
Eigen::VectorXd prox_dual_fidelity(const Eigen::VectorXd& v, double sigma,
                                   const Eigen::VectorXd& y_center, Exponent p,
                                   double radius, double tol = 1e-10,
                                   int max_newton = 200);

// Spectral norm by power iteration on mat^T * mat, run until the eigenvalue
// estimate's relative change drops below tol (deterministic start vector
// with a fixed perturbation restart if it lands in a null space).
double operator_norm(const Eigen::MatrixXd& mat, double tol = 1e-6);

// Solves min ||u||_1 subject to ||y_center - sensing*u||_{p,w} <= radius by
// the theta-relaxed primal-dual (Arrow-Hurwicz/Chambolle-Pock) iteration.
// The weighted ball is handled by rescaling rows once up front
// (Phi' = diag(w) Phi, y' = diag(w) y), so the inner projection is always
// onto an unweighted lp ball. A zero radius is replaced by
// 1e-12 * ||y'||_2 to keep the projection well posed. Iterates diverging
// past 1e6 * ||y'|| / ||Phi'|| abort with status "diverged".
SolveReport gbpdn_solve(const Eigen::VectorXd& y_center,
                        const Eigen::MatrixXd& sensing,
                        const WeightedConstraint& constraint,
                        const SolverConfig& cfg = SolverConfig{});

}  // namespace qcs

#endif  // QCS_SOLVER_HPP_
