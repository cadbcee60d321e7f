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
#include "qcs/compander.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt3 = 1.7320508075688772935274463415059;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
constexpr double kTwoPi = 6.2831853071795864769252867665590;

// Standard normal CDF through erfc; accurate in both tails.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi);
}

// Standard normal quantile: Acklam's rational approximation (~1e-9
// absolute) followed by two Halley polish steps against the erfc-based CDF,
// which brings the result to within a few ulps.
double normal_quantile(double u) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double u_low = 0.02425;

  double x;
  if (u < u_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - u_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int step = 0; step < 2; ++step) {
    const double e = normal_cdf(x) - u;
    const double t = e / normal_pdf(x);
    x -= t / (1.0 + 0.5 * t * x);  // Halley update
  }
  return x;
}

}  // namespace

void validate_source(const GaussianSource& src) {
  if (!(src.sigma0 > 0.0) || !std::isfinite(src.sigma0)) {
    throw std::invalid_argument("GaussianSource: sigma0 must be positive");
  }
}

double source_pdf(double lambda, const GaussianSource& src) {
  const double s = src.sigma0;
  return std::exp(-lambda * lambda / (2.0 * s * s)) /
         (s * std::sqrt(kTwoPi));
}

double compress(double lambda, const GaussianSource& src) {
  validate_source(src);
  // CDF of N(0, 3*sigma0^2); erfc handles +-inf arguments exactly.
  return normal_cdf(lambda / (kSqrt3 * src.sigma0));
}

double expand(double u, const GaussianSource& src) {
  validate_source(src);
  if (!(u > 0.0) || !(u < 1.0)) {
    throw std::domain_error("expand: argument must lie in (0, 1)");
  }
  return kSqrt3 * src.sigma0 * normal_quantile(u);
}

double qpdf(double lambda, const GaussianSource& src) {
  validate_source(src);
  const double s = kSqrt3 * src.sigma0;
  return std::exp(-lambda * lambda / (2.0 * s * s)) / (s * std::sqrt(kTwoPi));
}

QuantizerModel design_quantizer(int B, const GaussianSource& src) {
  validate_source(src);
  if (B < 1 || B > 16) {
    throw std::invalid_argument("design_quantizer: B must be in [1, 16], got " +
                                std::to_string(B));
  }
  const int bins = 1 << B;
  const double alpha = std::ldexp(1.0, -B);

  QuantizerModel q;
  q.B = B;
  q.alpha = alpha;
  q.sigma0 = src.sigma0;
  q.thresholds.assign(static_cast<size_t>(bins) + 1, 0.0);
  q.levels.assign(static_cast<size_t>(bins), 0.0);

  q.thresholds.front() = -kInf;
  q.thresholds.back() = kInf;
  // Fill the positive half of the grid and mirror it so the symmetry
  // t_k = -t_{B+2-k}, w_k = -w_{B+1-k} holds exactly in floating point.
  // (bins is a power of two, so i*alpha == 1/2 exactly at the midpoint.)
  for (int i = 1; i < bins; ++i) {
    if (2 * i < bins) continue;
    const double t = (2 * i == bins) ? 0.0 : expand(i * alpha, src);
    q.thresholds[static_cast<size_t>(i)] = t;
    if (bins - i != i) q.thresholds[static_cast<size_t>(bins - i)] = -t;
  }
  for (int i = 0; i < bins; ++i) {
    if (2 * i + 1 < bins) continue;
    const double w = expand((i + 0.5) * alpha, src);
    q.levels[static_cast<size_t>(i)] = w;
    q.levels[static_cast<size_t>(bins - 1 - i)] = -w;
  }
  return q;
}

QuantizeResult quantize(double z, const QuantizerModel& q) {
  if (std::isnan(z)) {
    throw std::invalid_argument("quantize: NaN measurement");
  }
  // Half-open bins [t_k, t_{k+1}): count interior thresholds <= z.
  const auto first = q.thresholds.begin() + 1;
  const auto last = q.thresholds.end() - 1;
  const auto it = std::upper_bound(first, last, z);
  const int k = static_cast<int>(it - first) + 1;
  return QuantizeResult{k, q.levels[static_cast<size_t>(k - 1)]};
}

double panter_dite_mse(const QuantizerModel& q) {
  const double pi = 3.1415926535897932384626433832795;
  return (kSqrt3 * pi / 2.0) * q.sigma0 * q.sigma0 *
         std::ldexp(1.0, -2 * q.B);
}

std::string quantizer_to_json(const QuantizerModel& q) {
  nlohmann::json j;
  j["B"] = q.B;
  j["sigma0"] = q.sigma0;
  nlohmann::json thr = nlohmann::json::array();
  for (double t : q.thresholds) {
    if (t == -kInf) {
      thr.push_back("-inf");
    } else if (t == kInf) {
      thr.push_back("+inf");
    } else {
      thr.push_back(t);
    }
  }
  j["thresholds"] = std::move(thr);
  j["levels"] = q.levels;
  return j.dump(2);
}

}  // namespace qcs
