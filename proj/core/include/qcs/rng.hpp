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
#ifndef QCS_RNG_HPP_
#define QCS_RNG_HPP_

#include <array>
#include <cstdint>

namespace qcs {

// Counter-based PRNG (Philox4x32 with 10 rounds). A generator is a pure
// function of (key, stream, counter), so any (seed, stream) pair names a
// reproducible sequence regardless of which thread draws from it. The
// 128-bit counter is split: the low 64 bits count blocks within a stream,
// the high 64 bits carry the stream id, giving 2^64 disjoint substreams of
// 2^66 32-bit outputs each.
class Philox {
 public:
  explicit Philox(uint64_t key, uint64_t stream = 0)
      : key_{static_cast<uint32_t>(key), static_cast<uint32_t>(key >> 32)},
        ctr_{0u, 0u, static_cast<uint32_t>(stream),
             static_cast<uint32_t>(stream >> 32)} {}

  uint32_t next_u32() {
    if (buf_pos_ == 4) refill();
    return buf_[buf_pos_++];
  }

  uint64_t next_u64() {
    uint64_t lo = next_u32();
    uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in (0, 1]; safe as a log() argument.
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound) by rejection.
  uint32_t next_below(uint32_t bound);

  // Standard normal via Box-Muller; generates pairs and caches one.
  double next_gaussian();

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze, with the usual
  // boost Gamma(a) = Gamma(a+1) * U^{1/a} for shape < 1.
  double next_gamma(double shape);

 private:
  void refill();

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> ctr_;
  std::array<uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  double gauss_cache_ = 0.0;
  bool has_gauss_cache_ = false;
};

// SplitMix64 finalizer; used to derive per-trial seeds from a master seed
// without correlated low bits.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Fixed stream ids so that the generators drawing different objects of one
// trial never overlap even though they share the trial seed.
enum class StreamId : uint64_t {
  kMatrix = 1,
  kSignal = 2,
  kNoise = 3,
  kMeasurementSource = 4,
};

}  // namespace qcs

#endif  // QCS_RNG_HPP_
