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
#include "qcs/wnorm.hpp"

#include <cmath>
#include <stdexcept>

namespace qcs {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kLn2 = 0.69314718055994530941723212145818;

void check_same_size(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

}  // namespace

double weighted_lp_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                        Exponent p) {
  check_same_size(v, w, "weighted_lp_norm");
  const Eigen::ArrayXd scaled = (w.array() * v.array()).abs();
  if (v.size() == 0) return 0.0;
  const double m = scaled.maxCoeff();
  if (p.is_inf() || m == 0.0) return m;
  const int pv = p.value();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < scaled.size(); ++i) {
    sum += ipow(scaled[i] / m, pv);
  }
  return m * std::pow(sum, 1.0 / pv);
}

Eigen::VectorXd dpc_weights(const Eigen::VectorXd& quantized_levels,
                            Exponent p, const GaussianSource& src) {
  validate_source(src);
  const Eigen::Index n = quantized_levels.size();
  Eigen::VectorXd w(n);
  if (!p.is_inf() && p.value() < 2) {
    throw std::invalid_argument("dpc_weights: requires p >= 2");
  }
  if (!p.is_inf() && p.value() == 2) {
    w.setOnes();  // (p-2)/p = 0 exactly
    return w;
  }
  const double expo = p.is_inf() ? 1.0 : (p.value() - 2.0) / p.value();
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = std::pow(qpdf(quantized_levels[i], src), expo);
  }
  return w;
}

double norm_phi0_one_third(const GaussianSource& src) {
  validate_source(src);
  return 2.0 * kPi * src.sigma0 * src.sigma0 * std::pow(3.0, 1.5);
}

double epsilon_p(int M, int B, Exponent p, const GaussianSource& src) {
  validate_source(src);
  if (M < 1 || B < 1) {
    throw std::invalid_argument("epsilon_p: M and B must be >= 1");
  }
  if (p.is_inf()) {
    return std::ldexp(1.0, -(B + 1));  // compressed-domain half bin
  }
  const int pv = p.value();
  if (pv < 2) throw std::invalid_argument("epsilon_p: requires p >= 2");
  const double body = static_cast<double>(M) * std::ldexp(1.0, -B * pv) /
                      ((pv + 1.0) * std::ldexp(1.0, pv)) *
                      norm_phi0_one_third(src);
  return std::pow(body, 1.0 / pv);
}

ConsistencyReport check_consistency(const Eigen::VectorXd& x_est,
                                    const Eigen::MatrixXd& sensing,
                                    const Eigen::VectorXd& y_levels,
                                    ConsistencyKind kind,
                                    const QuantizerModel& q,
                                    const PLevelTable* table) {
  if (sensing.cols() != x_est.size() || sensing.rows() != y_levels.size()) {
    throw std::invalid_argument("check_consistency: shape mismatch");
  }
  const Eigen::VectorXd zx = sensing * x_est;
  const Eigen::Index M = y_levels.size();
  const GaussianSource src = q.source();
  ConsistencyReport rep;

  switch (kind) {
    case ConsistencyKind::QC: {
      // Bin-exact membership check; the residual reports the sup distance
      // in compressed units (where the bin has width alpha).
      bool ok = true;
      double worst = 0.0;
      for (Eigen::Index i = 0; i < M; ++i) {
        const int bin_y = quantize(y_levels[i], q).bin;
        const int bin_x = quantize(zx[i], q).bin;
        ok = ok && (bin_x == bin_y);
        worst = std::max(worst, std::fabs(compress(zx[i], src) -
                                          compress(y_levels[i], src)));
      }
      rep.consistent = ok;
      rep.residual = worst;
      rep.radius = 0.5 * q.alpha;
      return rep;
    }
    case ConsistencyKind::DC: {
      rep.radius = epsilon_p(static_cast<int>(M), q.B, Exponent(2), src);
      rep.residual = (zx - y_levels).norm();
      rep.consistent = rep.residual <= rep.radius;
      return rep;
    }
    case ConsistencyKind::DpC: {
      if (table == nullptr) {
        throw std::invalid_argument("check_consistency: DpC needs a level table");
      }
      const Exponent p = table->p;
      Eigen::VectorXd center(M);
      const bool plain_l2 = !p.is_inf() && p.value() == 2;
      for (Eigen::Index i = 0; i < M; ++i) {
        // The p = 2 dequantizer is the quantizer's own level, which makes
        // the check coincide exactly with DC.
        center[i] = plain_l2 ? quantize(y_levels[i], q).level
                             : quantize_p(y_levels[i], *table).level;
      }
      const Eigen::VectorXd w = dpc_weights(center, p, src);
      rep.radius = epsilon_p(static_cast<int>(M), q.B, p, src);
      rep.residual = weighted_lp_norm(zx - center, w, p);
      rep.consistent = rep.residual <= rep.radius;
      return rep;
    }
  }
  throw std::logic_error("check_consistency: unknown kind");
}

double gaussian_abs_moment_root(int p) {
  if (p < 1) throw std::invalid_argument("gaussian_abs_moment_root: p >= 1");
  // nu_p^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi), evaluated in log space.
  const double log_nu_p =
      (0.5 * p * kLn2 + std::lgamma(0.5 * (p + 1)) - 0.5 * std::log(kPi)) / p;
  return std::exp(log_nu_p);
}

double gaussian_lpw_expectation(const Eigen::VectorXd& w, Exponent p) {
  if (p.is_inf()) {
    throw std::invalid_argument("gaussian_lpw_expectation: finite p only");
  }
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(w.size());
  return gaussian_abs_moment_root(p.value()) * weighted_lp_norm(w, ones, p);
}

LpwExpectationReport gaussian_lpw_expectation_report(const Eigen::VectorXd& w,
                                                     Exponent p) {
  const int pv = p.value();  // throws on inf
  const Eigen::Index M = w.size();
  LpwExpectationReport rep;
  rep.mu = gaussian_lpw_expectation(w, p);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M);
  const double wp = weighted_lp_norm(w, ones, p);
  const double floor = std::pow(static_cast<double>(M), -1.0 / pv) * wp;
  rep.theta_empirical = w.maxCoeff() / floor;
  rep.theta_hra = std::pow((pv + 1.0) / 3.0, 1.0 / pv);
  const double bulge =
      1.0 + std::ldexp(1.0, pv + 1) * ipow(rep.theta_empirical, pv) / M;
  rep.lower_factor = std::pow(bulge, 1.0 / pv - 1.0);
  return rep;
}

double error_ratio_diagnostic(int M, int B, Exponent p,
                              const GaussianSource& src) {
  const int pv = p.value();
  if (pv < 2) throw std::invalid_argument("error_ratio_diagnostic: p >= 2");
  // mu over the population weights: E[w^p] = E[G'(z)^{p-2}] has the closed
  // Gaussian form (6 pi sigma0^2)^{-(p-2)/2} * sqrt(3/(p+1)), so
  // mu = nu_p * (M * E[w^p])^{1/p}; M cancels against epsilon_p.
  const double s2 = src.sigma0 * src.sigma0;
  const double ew_p = std::pow(6.0 * kPi * s2, -0.5 * (pv - 2)) *
                      std::sqrt(3.0 / (pv + 1.0));
  const double mu = gaussian_abs_moment_root(pv) *
                    std::pow(static_cast<double>(M) * ew_p, 1.0 / pv);
  return epsilon_p(M, B, p, src) / mu;
}

ErrorRatioReport error_ratio_report(int M, int B, Exponent p,
                                    const GaussianSource& src) {
  const int pv = p.value();
  ErrorRatioReport rep;
  rep.ratio = error_ratio_diagnostic(M, B, p, src);
  const double cprime = 9.0 / 8.0 * std::sqrt(std::exp(1.0) * kPi / 3.0);
  rep.hra_bound = cprime * std::ldexp(1.0, -B) *
                  std::pow(pv + 1.0, -0.5 / pv) / std::sqrt(pv + 1.0);
  return rep;
}

double transition_threshold(int B, double beta, const GaussianSource& src) {
  validate_source(src);
  if (!(beta > 0.0) || !(beta < 1.0)) {
    throw std::invalid_argument("transition_threshold: beta must be in (0,1)");
  }
  return src.sigma0 * std::sqrt(6.0 * beta * kLn2 * B);
}

}  // namespace qcs
