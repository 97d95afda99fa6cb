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

#include "facegate/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "facegate/error.hpp"
#include "imaging_detail.hpp"

namespace facegate::imaging {

namespace {

// Below this many pixels the OpenMP fork/join costs more than the loop.
constexpr long long kParallelThreshold = 64 * 64;

}  // namespace

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> luma)
    : width_(width), height_(height), luma_(std::move(luma)) {
  if (width < 1 || height < 1 ||
      luma_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kInvalidImage,
                "gray image " + std::to_string(width) + "x" + std::to_string(height) +
                    " does not match " + std::to_string(luma_.size()) + " luma values");
  }
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : GrayImage(width, height,
                std::vector<std::uint8_t>(
                    static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill)) {}

double DifferenceHistogram::probability(int d) const {
  if (total_pairs == 0 || d < 0 || d > 255) return 0.0;
  return static_cast<double>(counts[d]) / static_cast<double>(total_pairs);
}

std::optional<RectRegion> clip(const RectRegion& region, int width, int height) {
  const long long x0 = std::max<long long>(region.x, 0);
  const long long y0 = std::max<long long>(region.y, 0);
  const long long x1 = std::min<long long>(static_cast<long long>(region.x) + region.w, width);
  const long long y1 = std::min<long long>(static_cast<long long>(region.y) + region.h, height);
  if (region.w < 1 || region.h < 1 || x1 <= x0 || y1 <= y0) return std::nullopt;
  return RectRegion{static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0),
                    static_cast<int>(y1 - y0)};
}

GrayImage to_grayscale(const RgbImage& image) {
  const auto pixels = static_cast<std::size_t>(std::max(image.width, 0)) *
                      static_cast<std::size_t>(std::max(image.height, 0));
  if (image.width < 1 || image.height < 1 || image.rgb.size() != 3 * pixels) {
    throw Error(ErrorCode::kInvalidImage, "RGB image is empty or its buffer size is inconsistent");
  }
  std::vector<std::uint8_t> luma(pixels);
  const std::uint8_t* src = image.rgb.data();
  const auto n = static_cast<long long>(pixels);
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (long long i = 0; i < n; ++i) {
    luma[i] = detail::luma_of(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
  }
  return GrayImage(image.width, image.height, std::move(luma));
}

Measurement laplacian_variance(const GrayImage& image, const RectRegion& region) {
  const auto clipped = clip(region, image.width(), image.height());
  if (!clipped || clipped->w < 3 || clipped->h < 3) return {0.0, true};
  const RectRegion r = *clipped;
  const int x_begin = r.x + 1, x_end = r.x + r.w - 1;
  const int y_begin = r.y + 1, y_end = r.y + r.h - 1;

  long long sum = 0;
  long long sum_sq = 0;
#pragma omp parallel for schedule(static) reduction(+ : sum, sum_sq) if (r.area() > kParallelThreshold)
  for (int y = y_begin; y < y_end; ++y) {
    for (int x = x_begin; x < x_end; ++x) {
      const long long response = detail::laplacian_at(image, x, y);
      sum += response;
      sum_sq += response * response;
    }
  }
  const long long n = static_cast<long long>(x_end - x_begin) * (y_end - y_begin);
  return {detail::population_variance(sum, sum_sq, n), false};
}

DifferenceHistogram difference_histogram(const GrayImage& image, const RectRegion& region) {
  DifferenceHistogram hist;
  const auto clipped = clip(region, image.width(), image.height());
  if (!clipped) return hist;
  const RectRegion r = *clipped;

  std::uint64_t counts[256] = {};
#pragma omp parallel for schedule(static) reduction(+ : counts[:256]) if (r.area() > kParallelThreshold)
  for (int y = r.y; y < r.y + r.h; ++y) {
    for (int x = r.x; x < r.x + r.w; ++x) {
      const int v = image.at(x, y);
      if (x + 1 < r.x + r.w) ++counts[std::abs(v - image.at(x + 1, y))];
      if (y + 1 < r.y + r.h) ++counts[std::abs(v - image.at(x, y + 1))];
    }
  }
  std::copy(std::begin(counts), std::end(counts), hist.counts.begin());
  hist.total_pairs = detail::horizontal_and_vertical_pairs(r);
  return hist;
}

Measurement contrast(const GrayImage& image, const RectRegion& region) {
  return detail::contrast_from(difference_histogram(image, region));
}

}  // namespace facegate::imaging
