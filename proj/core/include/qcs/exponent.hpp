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
#ifndef QCS_EXPONENT_HPP_
#define QCS_EXPONENT_HPP_

#include <cctype>
#include <limits>
#include <stdexcept>
#include <string>

namespace qcs {

// Norm exponent: an integer p >= 1 or infinity. Small value type passed by
// value everywhere.
class Exponent {
 public:
  explicit Exponent(int p) : p_(p) {
    if (p < 1) {
      throw std::invalid_argument("Exponent: p must be >= 1, got " +
                                  std::to_string(p));
    }
  }

  static Exponent inf() { return Exponent(kInfTag, 0); }

  bool is_inf() const { return p_ == kInfTag; }

  // Finite value; throws on the infinite exponent.
  int value() const {
    if (is_inf()) {
      throw std::logic_error("Exponent: value() called on infinite exponent");
    }
    return p_;
  }

  double as_double() const {
    return is_inf() ? std::numeric_limits<double>::infinity()
                    : static_cast<double>(p_);
  }

  std::string str() const { return is_inf() ? "inf" : std::to_string(p_); }

  // Accepts a decimal integer or (case-insensitively) "inf".
  static Exponent parse(const std::string& text) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(c)));
    if (lower == "inf" || lower == "infinity") return inf();
    size_t used = 0;
    int p = 0;
    try {
      p = std::stoi(text, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("Exponent: cannot parse \"" + text + "\"");
    }
    if (used != text.size()) {
      throw std::invalid_argument("Exponent: trailing characters in \"" +
                                  text + "\"");
    }
    return Exponent(p);
  }

  friend bool operator==(Exponent a, Exponent b) { return a.p_ == b.p_; }
  friend bool operator!=(Exponent a, Exponent b) { return a.p_ != b.p_; }

 private:
  static constexpr int kInfTag = -1;
  Exponent(int tag, int) : p_(tag) {}
  int p_;
};

// x^n for integer n >= 0 by binary exponentiation. Used in quadrature and
// projection inner loops where std::pow would dominate the profile.
inline double ipow(double x, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

}  // namespace qcs

#endif  // QCS_EXPONENT_HPP_
