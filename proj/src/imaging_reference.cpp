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

#include <cstdlib>
#include <vector>

#include "facegate/imaging.hpp"
#include "imaging_detail.hpp"

namespace facegate::imaging::reference {

Measurement laplacian_variance(const GrayImage& image, const RectRegion& region) {
  const auto clipped = clip(region, image.width(), image.height());
  if (!clipped || clipped->w < 3 || clipped->h < 3) return {0.0, true};
  const RectRegion r = *clipped;

  std::vector<long long> responses;
  responses.reserve(static_cast<std::size_t>(r.w - 2) * (r.h - 2));
  for (int y = r.y + 1; y < r.y + r.h - 1; ++y) {
    for (int x = r.x + 1; x < r.x + r.w - 1; ++x) {
      responses.push_back(detail::laplacian_at(image, x, y));
    }
  }
  long long sum = 0, sum_sq = 0;
  for (long long v : responses) {
    sum += v;
    sum_sq += v * v;
  }
  return {detail::population_variance(sum, sum_sq, static_cast<long long>(responses.size())),
          false};
}

DifferenceHistogram difference_histogram(const GrayImage& image, const RectRegion& region) {
  DifferenceHistogram hist;
  const auto clipped = clip(region, image.width(), image.height());
  if (!clipped) return hist;
  const RectRegion r = *clipped;
  for (int y = r.y; y < r.y + r.h; ++y) {
    for (int x = r.x; x < r.x + r.w; ++x) {
      if (x + 1 < r.x + r.w) {
        ++hist.counts[std::abs(image.at(x, y) - image.at(x + 1, y))];
        ++hist.total_pairs;
      }
      if (y + 1 < r.y + r.h) {
        ++hist.counts[std::abs(image.at(x, y) - image.at(x, y + 1))];
        ++hist.total_pairs;
      }
    }
  }
  return hist;
}

Measurement contrast(const GrayImage& image, const RectRegion& region) {
  return detail::contrast_from(reference::difference_histogram(image, region));
}

}  // namespace facegate::imaging::reference
