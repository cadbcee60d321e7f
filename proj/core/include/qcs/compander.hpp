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
#ifndef QCS_COMPANDER_HPP_
#define QCS_COMPANDER_HPP_

#include <string>
#include <vector>

namespace qcs {

// Zero-mean Gaussian measurement source with standard deviation sigma0.
struct GaussianSource {
  double sigma0 = 1.0;
};

// Throws std::invalid_argument unless src.sigma0 > 0 and finite.
void validate_source(const GaussianSource& src);

// Density of the source, phi0 = N(0, sigma0^2).
double source_pdf(double lambda, const GaussianSource& src);

// Compressor G: the distortion-optimal compander for a Gaussian source is
// the CDF of N(0, 3*sigma0^2). Total on the extended reals: G(-inf) = 0,
// G(+inf) = 1, monotone increasing, G(-x) = 1 - G(x).
double compress(double lambda, const GaussianSource& src);

// Expander G^{-1} on (0, 1); throws std::domain_error outside the open
// interval (callers handle u in {0,1} as -/+infinity explicitly).
double expand(double u, const GaussianSource& src);

// Quantizer point density G' = N(0, 3*sigma0^2) density: strictly positive,
// even, maximized at zero, unit integral.
double qpdf(double lambda, const GaussianSource& src);

// B-bit companded quantizer for a Gaussian source.
//
// Bins are half-open, R_k = [t_k, t_{k+1}) for k = 1..2^B, with
// t_1 = -inf and t_{2^B + 1} = +inf; levels are the compander levels
// w_k = G^{-1}((k - 1/2) * alpha). Storage is zero-based:
// thresholds[i] = t_{i+1} (size 2^B + 1) and levels[i] = w_{i+1} (size 2^B).
struct QuantizerModel {
  int B = 0;
  double alpha = 0.0;  // 2^-B, compressed-domain bin width
  double sigma0 = 1.0;
  std::vector<double> thresholds;
  std::vector<double> levels;

  int num_bins() const { return static_cast<int>(levels.size()); }
  GaussianSource source() const { return GaussianSource{sigma0}; }
};

// Builds the B-bit quantizer; thresholds and levels are constructed from the
// positive half and mirrored, so the symmetry t_k = -t_{B+2-k},
// w_k = -w_{B+1-k} holds exactly. Throws std::invalid_argument unless
// 1 <= B <= 16.
QuantizerModel design_quantizer(int B, const GaussianSource& src);

// Result of a bin lookup. `bin` uses the 1-based convention k = 1..2^B of
// the threshold definition above (so arrays are indexed with bin - 1).
struct QuantizeResult {
  int bin = 0;
  double level = 0.0;
};

// Maps z to the bin with t_k <= z < t_{k+1} (binary search) and that bin's
// compander level. Total on the reals; throws std::invalid_argument on NaN.
QuantizeResult quantize(double z, const QuantizerModel& q);

// High-resolution prediction of the per-sample MSE of the companded
// quantizer: (sqrt(3)*pi/2) * sigma0^2 * 2^{-2B}.
double panter_dite_mse(const QuantizerModel& q);

// JSON dump {B, sigma0, thresholds[], levels[]}; the two infinite
// thresholds are encoded as the strings "-inf" / "+inf".
std::string quantizer_to_json(const QuantizerModel& q);

}  // namespace qcs

#endif  // QCS_COMPANDER_HPP_
