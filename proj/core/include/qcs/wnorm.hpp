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
#ifndef QCS_WNORM_HPP_
#define QCS_WNORM_HPP_

#include <Eigen/Dense>

#include "qcs/compander.hpp"
#include "qcs/exponent.hpp"
#include "qcs/plevels.hpp"

namespace qcs {

// One weighted-lp fidelity ball: { z : ||z - center||_{p,w} <= radius }.
// For the quantized-sensing construction at p = 2 the weights are
// identically one and the center is the observed dequantization itself;
// other decoders (e.g. noise stabilization) may use arbitrary positive
// weights.
struct WeightedConstraint {
  Exponent p = Exponent(2);
  Eigen::VectorXd weights;
  double radius = 0.0;
  Eigen::VectorXd center;
};

// ||diag(w) v||_p for p in [1, inf]. Weights must be positive and the
// dimensions must match (std::invalid_argument otherwise). Values are
// max-rescaled before the power sum, so large p cannot overflow.
double weighted_lp_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                        Exponent p);

// Fidelity weights w_i = G'(level_i)^{(p-2)/p} for the dequantized
// observation levels; exponent limits: p = 2 -> exactly 1, p = inf -> 1
// (full qpdf weight).
Eigen::VectorXd dpc_weights(const Eigen::VectorXd& quantized_levels,
                            Exponent p, const GaussianSource& src);

// ||phi0||_{1/3} = 2*pi*sigma0^2*3^{3/2}, the (1/3)-quasinorm of the source
// density that appears in the distortion asymptotics.
double norm_phi0_one_third(const GaussianSource& src);

// Asymptotic almost-sure radius of the weighted quantization distortion:
// eps_p = (M * 2^{-Bp} / ((p+1) 2^p) * ||phi0||_{1/3})^{1/p}; the infinite
// exponent returns the compressed-domain half-bin 2^{-(B+1)}. At p = 2 this
// is the distortion-consistency radius sqrt(M * (sqrt(3) pi / 2)) *
// sigma0 * 2^{-B}.
double epsilon_p(int M, int B, Exponent p, const GaussianSource& src);

// Consistency notions for an estimate x against observed levels y:
//  - QC:  every (sensing * x)_i falls in the bin of y_i (checked bin-exactly;
//         the residual reported is the compressed-domain sup distance).
//  - DC:  ||sensing * x - y||_2 <= eps_2.
//  - DpC: ||sensing * x - Q_p[y]||_{p,w} <= eps_p with the table's levels
//         and weights (p = 2 uses y itself as center, reducing exactly
//         to DC).
enum class ConsistencyKind { QC, DC, DpC };

struct ConsistencyReport {
  bool consistent = false;
  double residual = 0.0;
  double radius = 0.0;
};

// `table` is required for DpC and ignored otherwise.
ConsistencyReport check_consistency(const Eigen::VectorXd& x_est,
                                    const Eigen::MatrixXd& sensing,
                                    const Eigen::VectorXd& y_levels,
                                    ConsistencyKind kind,
                                    const QuantizerModel& q,
                                    const PLevelTable* table = nullptr);

// nu_p = (E|Z|^p)^{1/p} for Z standard normal:
// nu_p^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
double gaussian_abs_moment_root(int p);

// Upper estimate mu = nu_p ||w||_p of E||xi||_{p,w} for xi ~ N(0, Id).
// Finite p >= 1.
double gaussian_lpw_expectation(const Eigen::VectorXd& w, Exponent p);

// The matching concentration sandwich: E||xi||_{p,w} lies in
// [lower_factor * mu, mu] with lower_factor =
// (1 + 2^{p+1} theta^p / M)^{1/p - 1} and theta the weighting dynamic
// max_i w_i / (M^{-1/p} ||w||_p). The high-resolution estimate
// theta ~ ((p+1)/3)^{1/p} is reported alongside the realized value.
struct LpwExpectationReport {
  double mu = 0.0;
  double theta_empirical = 0.0;
  double theta_hra = 0.0;
  double lower_factor = 0.0;
};

LpwExpectationReport gaussian_lpw_expectation_report(const Eigen::VectorXd& w,
                                                     Exponent p);

// Ratio eps_p / mu of the fidelity radius to the expected weighted norm of
// a standard normal vector, with mu over the population dpc weights
// (E[G'(z)^{p-2}] has a closed Gaussian form). The ratio is independent of
// M and halves per extra bit. `hra_bound` is the closed-form
// high-resolution bound c' 2^{-B} (p+1)^{-1/(2p)} / sqrt(p+1) with
// c' = (9/8) sqrt(e pi / 3), reported for comparison only.
struct ErrorRatioReport {
  double ratio = 0.0;
  double hra_bound = 0.0;
};

double error_ratio_diagnostic(int M, int B, Exponent p,
                              const GaussianSource& src);
ErrorRatioReport error_ratio_report(int M, int B, Exponent p,
                                    const GaussianSource& src);

// Transition radius T(B) = sigma0 * sqrt(6 * beta * ln(2) * B) inside which
// the per-bin weighted distortion stabilizes (0 < beta < 1).
double transition_threshold(int B, double beta, const GaussianSource& src);

}  // namespace qcs

#endif  // QCS_WNORM_HPP_
