/* Copyright 2026 The ScoreCAM Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SCORECAM_PRNG_H_
#define SCORECAM_PRNG_H_

#include <cstdint>

namespace scorecam {

// SplitMix64 (Steele, Lea and Flood). Reference weights are drawn from this
// generator so that every platform reproduces them bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double NextUnit() {
    return static_cast<double>(Next() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-scale, scale), rounded to the nearest float.
  float NextSymmetric(double scale) {
    return static_cast<float>((2.0 * NextUnit() - 1.0) * scale);
  }

 private:
  std::uint64_t state_;
};

}  // namespace scorecam

#endif  // SCORECAM_PRNG_H_
