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

#ifndef TABADV_COMMON_RANDOM_H_
#define TABADV_COMMON_RANDOM_H_

#include <cstdint>
#include <random>

#include "absl/strings/string_view.h"

namespace tabadv {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
inline uint64_t MixBits(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable seed for a named stage and item index. Independent of scheduling
// order, so parallel workers draw the same streams as a serial run.
inline uint64_t DeriveSeed(uint64_t master, absl::string_view stage,
                           uint64_t index = 0) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the stage name.
  for (const char c : stage) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return MixBits(MixBits(master ^ h) + index);
}

}  // namespace tabadv

#endif  // TABADV_COMMON_RANDOM_H_
