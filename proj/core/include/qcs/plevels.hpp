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
#ifndef QCS_PLEVELS_HPP_
#define QCS_PLEVELS_HPP_

#include <string>
#include <vector>

#include "qcs/compander.hpp"
#include "qcs/exponent.hpp"

namespace qcs {

// Default Simpson resolution for the per-bin moment integrals.
inline constexpr int kDefaultQuadraturePoints = 10001;

// Integration endpoints for the two unbounded bins are clipped at
// +-kBinClipSigmas * sigma0, beyond which the source density underflows to
// zero in double precision.
inline constexpr double kBinClipSigmas = 39.0;

// E_{k,p}(lambda) = integral over bin k of |t - lambda|^p phi0(t) dt,
// together with its first two lambda-derivatives, all approximated by the
// same composite Simpson rule.
struct BinMoment {
  int k = 0;
  int p = 0;
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// p-optimal levels for one (quantizer, p) pair: level k minimizes
// E_{k,p} over its (clipped) bin. For the infinite exponent the level is the
// bin midpoint (of the clipped bin for the two unbounded ones).
struct PLevelTable {
  Exponent p = Exponent(2);
  QuantizerModel q;
  std::vector<double> plevels;
  std::vector<int> newton_iters;  // zeros for the infinite exponent
  int quadrature_points = kDefaultQuadraturePoints;
};

// Simpson approximation of E_{k,p} and its derivatives at `lambda`.
// k is 1-based; requires odd n_quad >= 3 and integer p >= 2.
BinMoment bin_moment(int k, int p, double lambda, const QuantizerModel& q,
                     int n_quad);

// Minimizes E_{k,p} over bin k by a damped Newton iteration on the Simpson
// moments: starts at the bin midpoint (finite bins) or at the finite edge
// (unbounded bins), keeps a sign-change bracket on E' and falls back to
// bisection whenever a Newton step leaves it. Convergence when the step is
// below 1e-15 * max(|level|, sigma0); throws std::runtime_error with bin
// diagnostics after 100 iterations (convexity makes this unreachable).
double newton_plevel(int k, int p, const QuantizerModel& q,
                     int n_quad = kDefaultQuadraturePoints);

// Full table for one exponent; Newton per bin, or midpoints for p = inf.
PLevelTable plevel_table(Exponent p, const QuantizerModel& q,
                         int n_quad = kDefaultQuadraturePoints);

// Re-quantization through the shared thresholds: same bin as
// quantize(z, table.q), paired with the table's level for that bin.
QuantizeResult quantize_p(double z, const PLevelTable& table);

// JSON dump {p, B, sigma0, plevels[], newton_iters[], quadrature_points}.
std::string plevel_table_to_json(const PLevelTable& table);

}  // namespace qcs

#endif  // QCS_PLEVELS_HPP_
