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

#include "facegate/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "facegate/error.hpp"

namespace facegate::features {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

int grid_cell(double coord, int extent) {
  // Compare 3 * coord against k * extent rather than coord against the
  // fractional boundary so cells are exact for integer inputs.
  const double scaled = 3.0 * coord;
  if (scaled >= 2.0 * extent) return 2;
  if (scaled >= 1.0 * extent) return 1;
  return 0;
}

}  // namespace

bool HeadPose::valid() const {
  auto ok = [](double a) { return std::isfinite(a) && a >= -180.0 && a <= 180.0; };
  return ok(yaw) && ok(pitch) && ok(roll);
}

std::string_view to_string(FeatureMask mask) {
  switch (mask) {
    case FeatureMask::kFF: return "FF";
    case FeatureMask::kFM: return "FM";
    case FeatureMask::kFFFM: return "FF+FM";
  }
  return "FF+FM";
}

FeatureMask parse_mask(std::string_view text) {
  if (text == "FF") return FeatureMask::kFF;
  if (text == "FM") return FeatureMask::kFM;
  if (text == "FF+FM" || text == "FM+FF") return FeatureMask::kFFFM;
  throw Error(ErrorCode::kConfigError, "unknown feature mask '" + std::string(text) + "'");
}

std::size_t input_dim(FeatureMask mask) {
  switch (mask) {
    case FeatureMask::kFF: return kHandcraftedDim;
    case FeatureMask::kFM: return kEmbeddingDim;
    case FeatureMask::kFFFM: return kFusedDim;
  }
  return kFusedDim;
}

bool uses_embedding(FeatureMask mask) { return mask != FeatureMask::kFF; }
bool uses_handcrafted(FeatureMask mask) { return mask != FeatureMask::kFM; }

bool HandcraftedFeatures::satisfies_invariants(double eps) const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  for (auto i : {kSizeRatioImage, kSizeRatioMax}) {
    if (values[i] < 0.0 || values[i] > 1.0 + eps) return false;
  }
  if (values[kRegionIndex] < 1.0 || values[kRegionIndex] > 9.0) return false;
  double counted = 0.0;
  for (std::size_t r = 0; r < 9; ++r) counted += values[kRegionCountsBegin + r];
  return counted == values[kTotalFaceCount];
}

Point eye_midpoint(const FaceObservation& face) {
  if (!face.eye_left || !face.eye_right) {
    throw Error(ErrorCode::kMissingLandmark, "face '" + face.face_id + "' lacks an eye landmark");
  }
  return {(face.eye_left->x + face.eye_right->x) / 2.0,
          (face.eye_left->y + face.eye_right->y) / 2.0};
}

int region_of(Point point, int image_w, int image_h) {
  if (!(point.x >= 0.0 && point.y >= 0.0 && point.x <= image_w && point.y <= image_h)) {
    throw Error(ErrorCode::kOutOfBounds, "point (" + std::to_string(point.x) + ", " +
                                             std::to_string(point.y) + ") outside " +
                                             std::to_string(image_w) + "x" +
                                             std::to_string(image_h) + " image");
  }
  return grid_cell(point.y, image_h) * 3 + grid_cell(point.x, image_w) + 1;
}

std::vector<HandcraftedFeatures> extract_all(const GrayImage& image,
                                             std::span<const FaceObservation> faces) {
  const std::size_t n = faces.size();
  std::vector<HandcraftedFeatures> out(n);
  if (n == 0) return out;

  std::vector<int> regions(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!faces[i].pose) {
      throw Error(ErrorCode::kMissingPose,
                  "face '" + faces[i].face_id + "' has no head pose; resolve poses first");
    }
    regions[i] = region_of(eye_midpoint(faces[i]), image.width(), image.height());
  }

  const double image_blur = imaging::laplacian_variance(image, image.bounds()).value;
  const double image_contrast = imaging::contrast(image, image.bounds()).value;
  const double image_size = static_cast<double>(image.bounds().area());

  std::vector<double> size(n), blur(n), contrast(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    size[i] = static_cast<double>(faces[i].box.area());
    blur[i] = imaging::laplacian_variance(image, faces[i].box).value;
    contrast[i] = imaging::contrast(image, faces[i].box).value;
  }
  const double max_size = *std::max_element(size.begin(), size.end());
  const double max_blur = *std::max_element(blur.begin(), blur.end());
  const double max_contrast = *std::max_element(contrast.begin(), contrast.end());

  std::array<double, 9> region_counts{};
  for (int r : regions) region_counts[r - 1] += 1.0;

  using H = HandcraftedFeatures;
  for (std::size_t i = 0; i < n; ++i) {
    H& f = out[i];
    f[H::kSizeRatioImage] = safe_ratio(size[i], image_size);
    f[H::kSizeRatioMax] = safe_ratio(size[i], max_size);
    f[H::kRegionIndex] = regions[i];
    f[H::kTotalFaceCount] = static_cast<double>(n);
    std::copy(region_counts.begin(), region_counts.end(), f.values.begin() + H::kRegionCountsBegin);
    f[H::kYaw] = faces[i].pose->yaw;
    f[H::kPitch] = faces[i].pose->pitch;
    f[H::kRoll] = faces[i].pose->roll;
    f[H::kBlurRatioImage] = safe_ratio(blur[i], image_blur);
    f[H::kBlurRatioMax] = safe_ratio(blur[i], max_blur);
    f[H::kContrastRatioImage] = safe_ratio(contrast[i], image_contrast);
    f[H::kContrastRatioMax] = safe_ratio(contrast[i], max_contrast);
  }
  return out;
}

HandcraftedFeatures extract_handcrafted(const GrayImage& image,
                                        std::span<const FaceObservation> faces,
                                        std::string_view target) {
  const auto it = std::find_if(faces.begin(), faces.end(),
                               [&](const FaceObservation& f) { return f.face_id == target; });
  if (it == faces.end()) {
    throw Error(ErrorCode::kUnknownFace, "face '" + std::string(target) + "' not in image");
  }
  return extract_all(image, faces)[static_cast<std::size_t>(it - faces.begin())];
}

FeatureVector assemble_feature_vector(const HandcraftedFeatures& hand,
                                      const std::optional<Embedding>& embedding,
                                      FeatureMask mask) {
  FeatureVector v;
  v.mask = mask;
  v.values.reserve(input_dim(mask));
  if (uses_embedding(mask)) {
    if (!embedding) {
      throw Error(ErrorCode::kMissingEmbedding,
                  "mask " + std::string(to_string(mask)) + " requires a face embedding");
    }
    v.values.insert(v.values.end(), embedding->values.begin(), embedding->values.end());
  }
  if (uses_handcrafted(mask)) {
    v.values.insert(v.values.end(), hand.values.begin(), hand.values.end());
  }
  return v;
}

std::vector<double> Scaler::apply(std::span<const double> values) const {
  if (values.size() != mean.size()) {
    throw Error(ErrorCode::kShapeMismatch, "scaler expects " + std::to_string(mean.size()) +
                                               " values, got " + std::to_string(values.size()));
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean[i]) / scale[i];
  return out;
}

FeatureVector Scaler::apply(const FeatureVector& v) const { return {apply(v.values), v.mask}; }

Scaler fit_scaler(std::span<const std::vector<double>> training) {
  if (training.empty()) throw Error(ErrorCode::kEmptyInput, "cannot fit a scaler on no vectors");
  const std::size_t dim = training.front().size();
  for (const auto& v : training) {
    if (v.size() != dim) {
      throw Error(ErrorCode::kShapeMismatch, "scaler training vectors have mixed lengths (" +
                                                 std::to_string(dim) + " vs " +
                                                 std::to_string(v.size()) + ")");
    }
  }
  const double n = static_cast<double>(training.size());
  Scaler s;
  s.mean.assign(dim, 0.0);
  s.scale.assign(dim, 1.0);
  for (std::size_t d = 0; d < dim; ++d) {
    double lo = training.front()[d], hi = lo, sum = 0.0;
    for (const auto& v : training) {
      lo = std::min(lo, v[d]);
      hi = std::max(hi, v[d]);
      sum += v[d];
    }
    if (lo == hi) {
      s.mean[d] = lo;
      continue;
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& v : training) sq += (v[d] - mean) * (v[d] - mean);
    s.mean[d] = mean;
    s.scale[d] = std::sqrt(sq / n);
  }
  return s;
}

Scaler fit_scaler(std::span<const FeatureVector> training) {
  std::vector<std::vector<double>> raw;
  raw.reserve(training.size());
  for (const auto& v : training) raw.push_back(v.values);
  return fit_scaler(std::span<const std::vector<double>>(raw));
}

}  // namespace facegate::features
