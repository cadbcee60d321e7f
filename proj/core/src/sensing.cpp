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
#include "qcs/sensing.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qcs {

Eigen::MatrixXd gaussian_matrix(int M, int N, std::uint64_t seed) {
  if (M < 1 || N < 1) {
    throw std::invalid_argument("gaussian_matrix: M, N must be >= 1");
  }
  Philox rng(seed, static_cast<std::uint64_t>(StreamId::kMatrix));
  Eigen::MatrixXd mat(M, N);
  double* data = mat.data();  // column-major storage
  const Eigen::Index total = static_cast<Eigen::Index>(M) * N;
  for (Eigen::Index i = 0; i < total; ++i) data[i] = rng.next_gaussian();
  return mat;
}

Eigen::VectorXd sparse_signal(const SparseSignalSpec& spec) {
  if (spec.N < 1 || spec.K < 1 || spec.K > spec.N) {
    throw std::invalid_argument("sparse_signal: requires 1 <= K <= N");
  }
  Philox rng(spec.seed, static_cast<std::uint64_t>(StreamId::kSignal));
  // Partial Fisher-Yates: after K swaps the prefix is a uniform K-subset.
  std::vector<int> idx(spec.N);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < spec.K; ++i) {
    const int j =
        i + static_cast<int>(rng.next_below(static_cast<std::uint32_t>(spec.N - i)));
    std::swap(idx[i], idx[j]);
  }
  const double amp =
      spec.amp_sigma > 0.0 ? spec.amp_sigma : 1.0 / std::sqrt(spec.K);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.N);
  for (int i = 0; i < spec.K; ++i) x[idx[i]] = amp * rng.next_gaussian();
  if (spec.normalize) {
    const double n = x.norm();
    if (n > 0.0) {
      x /= n;
    } else {
      x[idx[0]] = 1.0;  // measure-zero draw; keep the contract exact
    }
  }
  return x;
}

QcsMeasurement qcs_measure(const Eigen::VectorXd& x,
                           const Eigen::MatrixXd& sensing,
                           const QuantizerModel& q, const PLevelTable* table) {
  if (x.size() != sensing.cols()) {
    throw std::invalid_argument("qcs_measure: signal/matrix shape mismatch");
  }
  if (table != nullptr && table->q.B != q.B) {
    throw std::invalid_argument("qcs_measure: level table built for another B");
  }
  const Eigen::VectorXd z = sensing * x;
  const Eigen::Index M = z.size();
  QcsMeasurement out;
  out.bins.resize(M);
  out.levels.resize(M);
  out.plevels.resize(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    const QuantizeResult r = quantize(z[i], q);
    out.bins[i] = r.bin;
    out.levels[i] = r.level;
    out.plevels[i] = table != nullptr ? table->plevels[r.bin - 1] : r.level;
  }
  return out;
}

Eigen::VectorXd uniform_quantize_baseline(const Eigen::VectorXd& z, int B) {
  if (B < 1 || B > 30) {
    throw std::invalid_argument("uniform_quantize_baseline: B out of range");
  }
  const double zmax = z.lpNorm<Eigen::Infinity>();
  if (zmax == 0.0) {
    throw std::invalid_argument("uniform_quantize_baseline: z must be nonzero");
  }
  const double alpha = 2.0 * zmax / std::ldexp(1.0, B);
  const long long half = 1LL << (B - 1);
  Eigen::VectorXd y(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    long long cell = static_cast<long long>(std::floor(z[i] / alpha));
    if (cell >= half) cell = half - 1;  // top edge folds into the top cell
    if (cell < -half) cell = -half;
    y[i] = alpha * (static_cast<double>(cell) + 0.5);
  }
  return y;
}

Eigen::VectorXd ggd_noise(const GGDNoiseSpec& spec) {
  if (!(spec.shape_p > 0.0)) {
    throw std::invalid_argument("ggd_noise: shape_p must be positive");
  }
  if (spec.scales.size() == 0 || spec.scales.minCoeff() <= 0.0) {
    throw std::invalid_argument("ggd_noise: scales must be positive");
  }
  Philox rng(spec.seed, static_cast<std::uint64_t>(StreamId::kNoise));
  const double inv_p = 1.0 / spec.shape_p;
  Eigen::VectorXd e(spec.scales.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double mag = std::pow(rng.next_gamma(inv_p), inv_p);
    const bool neg = (rng.next_u32() & 1u) != 0;
    e[i] = spec.scales[i] * (neg ? -mag : mag);
  }
  return e;
}

}  // namespace qcs
