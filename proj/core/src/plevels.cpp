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
#include "qcs/plevels.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qcs {

namespace {

// Clipped integration endpoints of bin k (1-based).
void clipped_bin(int k, const QuantizerModel& q, double* a, double* b) {
  const double clip = kBinClipSigmas * q.sigma0;
  *a = std::max(q.thresholds[static_cast<size_t>(k - 1)], -clip);
  *b = std::min(q.thresholds[static_cast<size_t>(k)], clip);
}

void check_bin_args(int k, int p, const QuantizerModel& q, int n_quad) {
  if (k < 1 || k > q.num_bins()) {
    throw std::invalid_argument("bin index " + std::to_string(k) +
                                " outside 1.." + std::to_string(q.num_bins()));
  }
  if (p < 2) {
    throw std::invalid_argument("bin moments require integer p >= 2, got " +
                                std::to_string(p));
  }
  if (n_quad < 3 || n_quad % 2 == 0) {
    throw std::invalid_argument("Simpson rule needs an odd point count >= 3, got " +
                                std::to_string(n_quad));
  }
}

// Precomputed Simpson grid for one bin: node positions and the products
// c_i * phi0(x_i), which do not depend on lambda and are reused across all
// Newton iterations.
struct SimpsonGrid {
  std::vector<double> x;
  std::vector<double> wphi;

  SimpsonGrid(double a, double b, int n, const GaussianSource& src) {
    x.resize(static_cast<size_t>(n));
    wphi.resize(static_cast<size_t>(n));
    const double dx = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double xi = a + i * dx;
      double c = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      x[static_cast<size_t>(i)] = xi;
      wphi[static_cast<size_t>(i)] = c * (dx / 3.0) * source_pdf(xi, src);
    }
  }

  // E, E', E'' at lambda for exponent p.
  void moments(double lambda, int p, double* e, double* d1, double* d2) const {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    const size_t n = x.size();
    for (size_t i = 0; i < n; ++i) {
      const double d = x[i] - lambda;
      const double ad = std::fabs(d);
      const double w = wphi[i];
      const double ppm2 = ipow(ad, p - 2);
      const double ppm1 = ppm2 * ad;
      s2 += w * ppm2;
      s1 += (d > 0.0) ? w * ppm1 : -w * ppm1;
      s0 += w * ppm1 * ad;
    }
    *e = s0;
    *d1 = -p * s1;
    *d2 = p * (p - 1) * s2;
  }
};

struct NewtonResult {
  double level = 0.0;
  int iters = 0;
};

NewtonResult newton_plevel_impl(int k, int p, const QuantizerModel& q,
                                int n_quad) {
  check_bin_args(k, p, q, n_quad);
  double a, b;
  clipped_bin(k, q, &a, &b);
  const SimpsonGrid grid(a, b, n_quad, q.source());

  // Midpoint start for finite bins; the finite edge for the two unbounded
  // bins, whose clipped midpoints sit far out in the underflowed tail.
  const bool lower_unbounded = (k == 1);
  const bool upper_unbounded = (k == q.num_bins());
  double lambda = lower_unbounded ? b : (upper_unbounded ? a : 0.5 * (a + b));

  // E is strictly convex on the bin, so E' changes sign exactly once;
  // [lo, hi] brackets that sign change throughout.
  double lo = a, hi = b;
  const double tol = 1e-15;

  for (int iter = 1; iter <= 100; ++iter) {
    double e, d1, d2;
    grid.moments(lambda, p, &e, &d1, &d2);
    if (d1 < 0.0) {
      lo = lambda;
    } else {
      hi = lambda;
    }
    double next;
    if (d2 > 0.0 && std::isfinite(d1 / d2)) {
      next = lambda - d1 / d2;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    const double step = std::fabs(next - lambda);
    lambda = next;
    if (step < tol * std::max(std::fabs(lambda), q.sigma0)) {
      return NewtonResult{lambda, iter};
    }
  }
  std::ostringstream msg;
  msg << "newton_plevel: no convergence for bin " << k << ", p = " << p
      << ", B = " << q.B << ", last level = " << lambda;
  throw std::runtime_error(msg.str());
}

}  // namespace

BinMoment bin_moment(int k, int p, double lambda, const QuantizerModel& q,
                     int n_quad) {
  check_bin_args(k, p, q, n_quad);
  double a, b;
  clipped_bin(k, q, &a, &b);
  const SimpsonGrid grid(a, b, n_quad, q.source());
  BinMoment m;
  m.k = k;
  m.p = p;
  grid.moments(lambda, p, &m.value, &m.d1, &m.d2);
  return m;
}

double newton_plevel(int k, int p, const QuantizerModel& q, int n_quad) {
  return newton_plevel_impl(k, p, q, n_quad).level;
}

PLevelTable plevel_table(Exponent p, const QuantizerModel& q, int n_quad) {
  PLevelTable table;
  table.p = p;
  table.q = q;
  table.quadrature_points = n_quad;
  const int bins = q.num_bins();
  table.plevels.resize(static_cast<size_t>(bins));
  table.newton_iters.assign(static_cast<size_t>(bins), 0);
  if (p.is_inf()) {
    for (int k = 1; k <= bins; ++k) {
      double a, b;
      clipped_bin(k, q, &a, &b);
      table.plevels[static_cast<size_t>(k - 1)] = 0.5 * (a + b);
    }
    return table;
  }
  for (int k = 1; k <= bins; ++k) {
    const NewtonResult r = newton_plevel_impl(k, p.value(), q, n_quad);
    table.plevels[static_cast<size_t>(k - 1)] = r.level;
    table.newton_iters[static_cast<size_t>(k - 1)] = r.iters;
  }
  return table;
}

QuantizeResult quantize_p(double z, const PLevelTable& table) {
  const QuantizeResult base = quantize(z, table.q);
  return QuantizeResult{base.bin,
                        table.plevels[static_cast<size_t>(base.bin - 1)]};
}

std::string plevel_table_to_json(const PLevelTable& table) {
  nlohmann::json j;
  j["p"] = table.p.str();
  j["B"] = table.q.B;
  j["sigma0"] = table.q.sigma0;
  j["plevels"] = table.plevels;
  j["newton_iters"] = table.newton_iters;
  j["quadrature_points"] = table.quadrature_points;
  return j.dump(2);
}

}  // namespace qcs
