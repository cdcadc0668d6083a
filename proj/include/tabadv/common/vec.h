/*
 * Copyright 2026 The TabAdv Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TABADV_COMMON_VEC_H_
#define TABADV_COMMON_VEC_H_

#include <cmath>
#include <span>
#include <vector>

namespace tabadv {

using Vec = std::vector<double>;

inline double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double Norm2(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

inline double Distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// (1 - t) * a + t * b
inline Vec Lerp(std::span<const double> a, std::span<const double> b,
                double t) {
  Vec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
  return out;
}

inline bool AllFinite(std::span<const double> a) {
  for (const double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace tabadv

#endif  // TABADV_COMMON_VEC_H_
