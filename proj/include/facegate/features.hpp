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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facegate/imaging.hpp"

namespace facegate::features {

using imaging::GrayImage;
using imaging::RectRegion;

inline constexpr std::size_t kHandcraftedDim = 20;
inline constexpr std::size_t kEmbeddingDim = 512;
inline constexpr std::size_t kFusedDim = kEmbeddingDim + kHandcraftedDim;

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Degrees, each in [-180, 180].
struct HeadPose {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  bool valid() const;
};

struct FaceObservation {
  std::string face_id;
  RectRegion box;
  std::optional<Point> eye_left;
  std::optional<Point> eye_right;
  std::optional<HeadPose> pose;
  bool detected = true;  // false for manually annotated faces
  std::optional<double> confidence;
};

enum class EmbeddingSource { kModel, kSidecar, kStub };

struct Embedding {
  std::array<double, kEmbeddingDim> values{};
  EmbeddingSource source = EmbeddingSource::kStub;
};

// Which parts of the fused input the classifier sees: handcrafted face
// features only, the face embedding only, or both.
enum class FeatureMask { kFF, kFM, kFFFM };

std::string_view to_string(FeatureMask mask);
FeatureMask parse_mask(std::string_view text);  // "FF", "FM", "FF+FM" (or "FM+FF")
std::size_t input_dim(FeatureMask mask);
bool uses_embedding(FeatureMask mask);
bool uses_handcrafted(FeatureMask mask);

// Fixed 20-slot layout of the per-face handcrafted record.
struct HandcraftedFeatures {
  enum Index : std::size_t {
    kSizeRatioImage = 0,
    kSizeRatioMax = 1,
    kRegionIndex = 2,
    kTotalFaceCount = 3,
    kRegionCountsBegin = 4,  // 9 slots, regions 1..9
    kYaw = 13,
    kPitch = 14,
    kRoll = 15,
    kBlurRatioImage = 16,
    kBlurRatioMax = 17,
    kContrastRatioImage = 18,
    kContrastRatioMax = 19,
  };

  std::array<double, kHandcraftedDim> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  double region_count(int region) const { return values[kRegionCountsBegin + region - 1]; }

  // Layout invariants: size ratios in [0, 1 + eps], region counts sum to the
  // total count, region index in 1..9, all values finite.
  bool satisfies_invariants(double eps = 1e-9) const;
};

struct FeatureVector {
  std::vector<double> values;
  FeatureMask mask = FeatureMask::kFFFM;
};

// Arithmetic mean of the eye landmarks. Throws kMissingLandmark.
Point eye_midpoint(const FaceObservation& face);

// 3x3 grid numbered row-major 1..9 with half-open cells [k*w/3, (k+1)*w/3).
// Points on the right or bottom edge fall into the last column/row.
// Throws kOutOfBounds outside [0, w] x [0, h].
int region_of(Point point, int image_w, int image_h);

// Features for every face of one image, in input order. Faces may be
// processed in parallel. Throws kMissingPose / kMissingLandmark.
std::vector<HandcraftedFeatures> extract_all(const GrayImage& image,
                                             std::span<const FaceObservation> faces);

// Throws kUnknownFace when target is not among faces.
HandcraftedFeatures extract_handcrafted(const GrayImage& image,
                                        std::span<const FaceObservation> faces,
                                        std::string_view target);

// Embedding first, then handcrafted. Throws kMissingEmbedding when the mask
// needs an embedding that was not supplied.
FeatureVector assemble_feature_vector(const HandcraftedFeatures& hand,
                                      const std::optional<Embedding>& embedding,
                                      FeatureMask mask);

// Per-dimension z-score. A constant dimension keeps its mean and gets scale 1
// so it maps to exactly 0.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;

  std::size_t dim() const { return mean.size(); }
  std::vector<double> apply(std::span<const double> values) const;
  FeatureVector apply(const FeatureVector& v) const;
};

// Throws kEmptyInput for no vectors and kShapeMismatch for mixed lengths.
Scaler fit_scaler(std::span<const FeatureVector> training);
Scaler fit_scaler(std::span<const std::vector<double>> training);

}  // namespace facegate::features
