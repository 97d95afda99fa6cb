//
// Copyright 2026 The Facegate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cmath>
#include <cstdint>

#include "facegate/imaging.hpp"

namespace facegate::imaging::detail {

inline std::uint8_t luma_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  const long v = std::lround(y);
  return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
}

// Kernel [[0,1,0],[1,-4,1],[0,1,0]] at an interior pixel.
inline long long laplacian_at(const GrayImage& img, int x, int y) {
  return static_cast<long long>(img.at(x, y - 1)) + img.at(x, y + 1) + img.at(x - 1, y) +
         img.at(x + 1, y) - 4LL * img.at(x, y);
}

// (n * sum_sq - sum^2) / n^2 with an exact integer numerator, so the result
// does not depend on the order in which the sums were accumulated.
inline double population_variance(long long sum, long long sum_sq, long long n) {
  if (n <= 0) return 0.0;
  const __int128 numerator = static_cast<__int128>(n) * sum_sq - static_cast<__int128>(sum) * sum;
  const long double nn = static_cast<long double>(n) * static_cast<long double>(n);
  return static_cast<double>(static_cast<long double>(numerator) / nn);
}

inline std::uint64_t horizontal_and_vertical_pairs(const RectRegion& r) {
  return static_cast<std::uint64_t>(r.w - 1) * r.h + static_cast<std::uint64_t>(r.h - 1) * r.w;
}

inline Measurement contrast_from(const DifferenceHistogram& hist) {
  if (hist.total_pairs == 0) return {0.0, true};
  std::uint64_t weighted = 0;
  for (int d = 1; d < 256; ++d) weighted += static_cast<std::uint64_t>(d) * d * hist.counts[d];
  return {static_cast<double>(weighted) / static_cast<double>(hist.total_pairs), false};
}

}  // namespace facegate::imaging::detail
