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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace facegate::imaging {

// Axis-aligned rectangle in pixel coordinates; (x, y) is the top-left corner.
struct RectRegion {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  bool operator==(const RectRegion&) const = default;
};

// Interleaved 8-bit RGB raster, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height
};

// 8-bit single-channel raster, row-major. luma.size() == width * height.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::vector<std::uint8_t> luma);
  GrayImage(int width, int height, std::uint8_t fill);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::uint8_t> luma() const { return luma_; }
  std::uint8_t at(int x, int y) const { return luma_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return luma_[static_cast<std::size_t>(y) * width_ + x]; }
  RectRegion bounds() const { return {0, 0, width_, height_}; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> luma_;
};

// A scalar measurement over a region. Degenerate regions (too small for the
// operator to be defined) report value 0 with degenerate set.
struct Measurement {
  double value = 0.0;
  bool degenerate = false;
};

// Counts of absolute gray differences d = |i - j| over adjacent pixel pairs.
struct DifferenceHistogram {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total_pairs = 0;

  double probability(int d) const;
};

// Intersects the region with the image; nullopt when nothing remains.
std::optional<RectRegion> clip(const RectRegion& region, int width, int height);

// BT.601 luma: round(0.299 R + 0.587 G + 0.114 B). Throws kInvalidImage on an
// empty or inconsistently sized raster.
GrayImage to_grayscale(const RgbImage& image);

// Population variance of the 4-neighbour Laplacian response over the interior
// of the (clipped) region. The region's one-pixel border is excluded.
Measurement laplacian_variance(const GrayImage& image, const RectRegion& region);

// Unordered horizontal and vertical neighbour pairs inside the region.
DifferenceHistogram difference_histogram(const GrayImage& image, const RectRegion& region);

// Sum over d of d^2 * P(d), from the difference histogram of the region.
Measurement contrast(const GrayImage& image, const RectRegion& region);

// Single-threaded implementations kept as the test and benchmark baseline for
// the OpenMP kernels above. Results are bit-identical by construction.
namespace reference {

Measurement laplacian_variance(const GrayImage& image, const RectRegion& region);
DifferenceHistogram difference_histogram(const GrayImage& image, const RectRegion& region);
Measurement contrast(const GrayImage& image, const RectRegion& region);

}  // namespace reference

}  // namespace facegate::imaging
