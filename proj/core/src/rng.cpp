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
#include "qcs/rng.hpp"

#include <cmath>

namespace qcs {

namespace {

// Philox4x32 round constants (multipliers and Weyl key increments).
constexpr uint64_t kMul0 = 0xD2511F53ull;
constexpr uint64_t kMul1 = 0xCD9E8D57ull;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

}  // namespace

void Philox::refill() {
  uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
  uint32_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    const uint64_t m0 = kMul0 * c0;
    const uint64_t m1 = kMul1 * c2;
    const uint32_t hi0 = static_cast<uint32_t>(m0 >> 32);
    const uint32_t lo0 = static_cast<uint32_t>(m0);
    const uint32_t hi1 = static_cast<uint32_t>(m1 >> 32);
    const uint32_t lo1 = static_cast<uint32_t>(m1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  buf_ = {c0, c1, c2, c3};
  buf_pos_ = 0;
  if (++ctr_[0] == 0) ++ctr_[1];  // low 64-bit block counter
}

uint32_t Philox::next_below(uint32_t bound) {
  // Classic rejection: draw until the value falls below the largest
  // multiple of `bound`, then reduce. Expected < 2 draws for any bound.
  const uint32_t limit = ~0u - (~0u % bound + 1) % bound;
  uint32_t v = next_u32();
  while (v > limit) v = next_u32();
  return v % bound;
}

double Philox::next_gaussian() {
  if (has_gauss_cache_) {
    has_gauss_cache_ = false;
    return gauss_cache_;
  }
  const double u1 = next_double_open();
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;  // 2*pi*u2
  gauss_cache_ = r * std::sin(a);
  has_gauss_cache_ = true;
  return r * std::cos(a);
}

double Philox::next_gamma(double shape) {
  if (shape < 1.0) {
    const double g = next_gamma(shape + 1.0);
    const double u = next_double_open();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = next_gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_double_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace qcs
