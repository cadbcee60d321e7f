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
#ifndef QCS_SENSING_HPP_
#define QCS_SENSING_HPP_

#include <cstdint>

#include <Eigen/Dense>

#include "qcs/compander.hpp"
#include "qcs/plevels.hpp"
#include "qcs/rng.hpp"

namespace qcs {

// Bernoulli-Gaussian sparse signal model: a support of exactly K indices
// drawn uniformly at random, Gaussian amplitudes on the support.
struct SparseSignalSpec {
  int N = 0;                // ambient dimension
  int K = 0;                // sparsity (exact number of nonzeros)
  double amp_sigma = 0.0;   // nonzero-entry std; <= 0 selects 1/sqrt(K)
  bool normalize = true;    // rescale to unit l2 norm
  std::uint64_t seed = 0;
};

// Generalized Gaussian noise, density proportional to exp(-|t/scale_i|^p)
// per coordinate.
struct GGDNoiseSpec {
  double shape_p = 2.0;
  Eigen::VectorXd scales;  // one positive scale per coordinate
  std::uint64_t seed = 0;
};

// Dense sensing matrix with i.i.d. standard normal entries, filled in
// column-major storage order from Philox substream StreamId::kMatrix of
// `seed`. Bit-reproducible for a fixed seed.
Eigen::MatrixXd gaussian_matrix(int M, int N, std::uint64_t seed);

// Draws the support by partial Fisher-Yates shuffle, then the amplitudes, in
// that order, from substream StreamId::kSignal. Exactly K nonzeros; unit l2
// norm when spec.normalize.
Eigen::VectorXd sparse_signal(const SparseSignalSpec& spec);

// Quantized compressive observations of one signal: the bin index (1-based),
// the compander reproduction level, and the distortion-optimal level for the
// decoder's exponent.
struct QcsMeasurement {
  Eigen::VectorXi bins;     // 1-based bin index per measurement
  Eigen::VectorXd levels;   // compander (p = 2 path) levels
  Eigen::VectorXd plevels;  // levels from `table`; equals `levels` when the
                            // p = 2 convention applies (no table given)
};

// Quantizes z = sensing * x elementwise. The quantizer is expected to be
// designed with sigma0 = ||x||_2 so that the measurements match the source
// model; callers enforce or deliberately deviate.
QcsMeasurement qcs_measure(const Eigen::VectorXd& x,
                           const Eigen::MatrixXd& sensing,
                           const QuantizerModel& q,
                           const PLevelTable* table = nullptr);

// Midpoint uniform quantizer over [-||z||_inf, ||z||_inf] split into 2^B
// cells of width alpha' = 2 ||z||_inf / 2^B: y_i = alpha' floor(z_i/alpha')
// + alpha'/2, with inputs on the top edge clamped into the top cell.
Eigen::VectorXd uniform_quantize_baseline(const Eigen::VectorXd& z, int B);

// Gamma-transform sampler: |e_i| = scale_i * Gamma(1/p, 1)^{1/p} with an
// independent random sign, drawn from substream StreamId::kNoise. Exact for
// every shape p > 0; satisfies E|e_i|^p = scale_i^p / p.
Eigen::VectorXd ggd_noise(const GGDNoiseSpec& spec);

}  // namespace qcs

#endif  // QCS_SENSING_HPP_
