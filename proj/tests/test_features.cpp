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

#include <random>

#include <gtest/gtest.h>

#include "facegate/error.hpp"
#include "facegate/features.hpp"
#include "support.hpp"

namespace facegate::features {
namespace {

using H = HandcraftedFeatures;

FaceObservation face(std::string id, RectRegion box, Point l, Point r, HeadPose pose = {}) {
  FaceObservation f;
  f.face_id = std::move(id);
  f.box = box;
  f.eye_left = l;
  f.eye_right = r;
  f.pose = pose;
  return f;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no facegate::Error thrown";
  return ErrorCode::kConfigError;
}

TEST(Landmarks, EyeMidpoint) {
  const auto f = face("a", {0, 0, 10, 10}, {3, 7}, {8, 2});
  EXPECT_EQ(eye_midpoint(f), (Point{5.5, 4.5}));
  FaceObservation g;
  g.eye_left = Point{1, 1};
  EXPECT_EQ(code_of([&] { eye_midpoint(g); }), ErrorCode::kMissingLandmark);
}

TEST(RegionGrid, HandCases) {
  EXPECT_EQ(region_of({100, 0}, 300, 300), 2);
  EXPECT_EQ(region_of({299, 299}, 300, 300), 9);
  EXPECT_EQ(region_of({0, 0}, 300, 300), 1);
  EXPECT_EQ(region_of({300, 300}, 300, 300), 9);
  EXPECT_EQ(region_of({99.999, 100}, 300, 300), 4);
  EXPECT_EQ(code_of([] { region_of({-0.1, 5}, 300, 300); }), ErrorCode::kOutOfBounds);
  EXPECT_EQ(code_of([] { region_of({5, 300.5}, 300, 300); }), ErrorCode::kOutOfBounds);
}

// Independent oracle: the cell is the unique (row, col) whose half-open
// interval holds the point, the last row/column also taking the far edge.
int oracle_region(double x, double y, int w, int h) {
  int col = -1, row = -1;
  for (int k = 0; k < 3; ++k) {
    const double lo = k * w / 3.0, hi = (k + 1) * w / 3.0;
    if ((x >= lo && x < hi) || (k == 2 && x == w)) col = k;
    const double vlo = k * h / 3.0, vhi = (k + 1) * h / 3.0;
    if ((y >= vlo && y < vhi) || (k == 2 && y == h)) row = k;
  }
  return row * 3 + col + 1;
}

TEST(RegionGrid, PartitionsEveryImageProperty) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dim(1, 2000);
  for (int t = 0; t < 200; ++t) {
    const int w = dim(rng), h = dim(rng);
    std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h);
    std::uniform_int_distribution<int> ix(0, w), iy(0, h);
    std::array<int, 9> hits{};
    for (int s = 0; s < 200; ++s) {
      const bool integer = s % 2 == 0;
      const double x = integer ? ix(rng) : ux(rng);
      const double y = integer ? iy(rng) : uy(rng);
      const int r = region_of({x, y}, w, h);
      ASSERT_GE(r, 1);
      ASSERT_LE(r, 9);
      // Exactly one cell claims the point; on exact integer boundaries the
      // floating oracle can disagree only by rounding, so check those exactly.
      if (!integer) {
        EXPECT_EQ(r, oracle_region(x, y, w, h)) << x << "," << y << " in " << w << "x" << h;
      }
      ++hits[r - 1];
    }
  }
}

TEST(RegionGrid, IntegerBoundariesBelongToNextCell) {
  for (int w : {3, 7, 300, 301}) {
    for (int x = 0; x <= w; ++x) {
      const int col = (region_of({double(x), 0}, w, w) - 1) % 3;
      const int expected = x * 3 >= 2 * w ? 2 : (x * 3 >= w ? 1 : 0);
      EXPECT_EQ(col, expected) << x << " of " << w;
    }
  }
}

TEST(Handcrafted, SceneWithTwoSubjectsInRegionTwoAndBystanderInThree) {
  GrayImage img(300, 300, std::uint8_t{0});
  std::vector<FaceObservation> faces = {
      face("s1", {110, 20, 40, 40}, {120, 40}, {140, 40}),
      face("s2", {150, 20, 40, 40}, {160, 40}, {180, 40}),
      face("b1", {230, 10, 20, 20}, {235, 20}, {245, 20}, {50, 5, -3}),
  };
  const auto all = extract_all(img, faces);
  ASSERT_EQ(all.size(), 3u);
  const std::array<double, 9> expected = {0, 2, 1, 0, 0, 0, 0, 0, 0};
  for (const auto& f : all) {
    for (int r = 1; r <= 9; ++r) EXPECT_EQ(f.region_count(r), expected[r - 1]);
    EXPECT_EQ(f[H::kTotalFaceCount], 3.0);
    EXPECT_TRUE(f.satisfies_invariants());
  }
  EXPECT_EQ(all[0][H::kRegionIndex], 2.0);
  EXPECT_EQ(all[2][H::kRegionIndex], 3.0);
  EXPECT_DOUBLE_EQ(all[0][H::kSizeRatioImage], 1600.0 / 90000.0);
  EXPECT_DOUBLE_EQ(all[0][H::kSizeRatioMax], 1.0);
  EXPECT_DOUBLE_EQ(all[2][H::kSizeRatioMax], 0.25);
  EXPECT_EQ(all[2][H::kYaw], 50.0);
  EXPECT_EQ(all[2][H::kRoll], -3.0);
  // Flat image: every blur/contrast ratio has a zero denominator.
  EXPECT_EQ(all[0][H::kBlurRatioImage], 0.0);
  EXPECT_EQ(all[0][H::kContrastRatioMax], 0.0);

  const auto single = extract_handcrafted(img, faces, "b1");
  EXPECT_EQ(single.values, all[2].values);
  EXPECT_EQ(code_of([&] { extract_handcrafted(img, faces, "zz"); }), ErrorCode::kUnknownFace);
}

TEST(Handcrafted, SharpestFaceHasUnitBlurRatio) {
  std::mt19937_64 rng(4);
  auto noisy = facegate::testing::random_gray(rng, 120, 90);
  // Flatten the right half so the right face is blurrier.
  std::vector<std::uint8_t> px(noisy.luma().begin(), noisy.luma().end());
  for (int y = 0; y < 90; ++y)
    for (int x = 60; x < 120; ++x) px[y * 120 + x] = 128;
  GrayImage img(120, 90, px);
  std::vector<FaceObservation> faces = {face("l", {5, 5, 40, 40}, {15, 20}, {30, 20}),
                                        face("r", {70, 5, 40, 40}, {80, 20}, {95, 20})};
  const auto all = extract_all(img, faces);
  EXPECT_DOUBLE_EQ(all[0][H::kBlurRatioMax], 1.0);
  EXPECT_DOUBLE_EQ(all[0][H::kContrastRatioMax], 1.0);
  EXPECT_EQ(all[1][H::kBlurRatioMax], 0.0);
  EXPECT_GT(all[0][H::kBlurRatioImage], 0.0);
}

TEST(Handcrafted, MissingPoseOrLandmark) {
  GrayImage img(50, 50, std::uint8_t{1});
  auto f = face("a", {0, 0, 10, 10}, {2, 2}, {6, 2});
  f.pose.reset();
  EXPECT_EQ(code_of([&] { extract_all(img, std::vector{f}); }), ErrorCode::kMissingPose);
  auto g = face("b", {0, 0, 10, 10}, {2, 2}, {6, 2});
  g.eye_right.reset();
  EXPECT_EQ(code_of([&] { extract_all(img, std::vector{g}); }), ErrorCode::kMissingLandmark);
  auto o = face("c", {0, 0, 10, 10}, {60, 2}, {70, 2});
  EXPECT_EQ(code_of([&] { extract_all(img, std::vector{o}); }), ErrorCode::kOutOfBounds);
}

TEST(Handcrafted, InvariantsHoldOnRandomScenes) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const int w = 64 + t * 7, h = 48 + t * 5;
    const auto img = facegate::testing::random_gray(rng, w, h, 32);
    std::uniform_int_distribution<int> n_faces(1, 12);
    std::vector<FaceObservation> faces;
    const int n = n_faces(rng);
    for (int i = 0; i < n; ++i) {
      std::uniform_int_distribution<int> ux(0, w - 8), uy(0, h - 8);
      const int x = ux(rng), y = uy(rng);
      const int s = std::min({8 + i, w - x, h - y});
      faces.push_back(face("f" + std::to_string(i), {x, y, s, s}, {x + 1.0, y + 2.0},
                           {x + s - 1.0, y + 2.0}, {10.0 * i, -5.0, 3.0}));
    }
    for (const auto& f : extract_all(img, faces)) {
      EXPECT_TRUE(f.satisfies_invariants());
      EXPECT_EQ(f[H::kTotalFaceCount], n);
    }
  }
}

TEST(Dimensions, MaskLengths) {
  EXPECT_EQ(kHandcraftedDim, 20u);
  EXPECT_EQ(kFusedDim, 532u);
  EXPECT_EQ(kEmbeddingDim, 512u);
  H hand;
  for (std::size_t i = 0; i < 20; ++i) hand[i] = double(i);
  Embedding e;
  for (std::size_t i = 0; i < 512; ++i) e.values[i] = 1000.0 + i;
  EXPECT_EQ(assemble_feature_vector(hand, e, FeatureMask::kFF).values.size(), 20u);
  EXPECT_EQ(assemble_feature_vector(hand, std::nullopt, FeatureMask::kFF).values.size(), 20u);
  const auto fused = assemble_feature_vector(hand, e, FeatureMask::kFFFM);
  ASSERT_EQ(fused.values.size(), 532u);
  EXPECT_EQ(fused.values[0], 1000.0);  // embedding first
  EXPECT_EQ(fused.values[512], 0.0);
  EXPECT_EQ(fused.values[531], 19.0);
  EXPECT_EQ(assemble_feature_vector(hand, e, FeatureMask::kFM).values.size(), 512u);
  for (auto m : {FeatureMask::kFF, FeatureMask::kFM, FeatureMask::kFFFM})
    EXPECT_EQ(input_dim(m), assemble_feature_vector(hand, e, m).values.size());
  EXPECT_EQ(code_of([&] { assemble_feature_vector(hand, std::nullopt, FeatureMask::kFM); }),
            ErrorCode::kMissingEmbedding);
}

TEST(Dimensions, MaskNames) {
  EXPECT_EQ(parse_mask("FF"), FeatureMask::kFF);
  EXPECT_EQ(parse_mask("FM+FF"), FeatureMask::kFFFM);
  EXPECT_EQ(to_string(FeatureMask::kFFFM), "FF+FM");
  EXPECT_EQ(code_of([] { parse_mask("XX"); }), ErrorCode::kConfigError);
}

TEST(Scaler, HandExample) {
  std::vector<std::vector<double>> xs = {{0.0, 3.0}, {10.0, 3.0}};
  const auto s = fit_scaler(std::span<const std::vector<double>>(xs));
  EXPECT_EQ(s.mean[0], 5.0);
  EXPECT_EQ(s.scale[0], 5.0);
  EXPECT_EQ(s.apply(xs[0])[0], -1.0);
  EXPECT_EQ(s.apply(xs[1])[0], 1.0);
  // Constant dimension maps to exactly zero.
  EXPECT_EQ(s.apply(xs[0])[1], 0.0);
  EXPECT_EQ(s.scale[1], 1.0);
}

TEST(Scaler, Errors) {
  std::vector<std::vector<double>> none;
  EXPECT_EQ(code_of([&] { fit_scaler(std::span<const std::vector<double>>(none)); }),
            ErrorCode::kEmptyInput);
  std::vector<std::vector<double>> mixed = {{1.0}, {1.0, 2.0}};
  EXPECT_EQ(code_of([&] { fit_scaler(std::span<const std::vector<double>>(mixed)); }),
            ErrorCode::kShapeMismatch);
  std::vector<std::vector<double>> ok = {{1.0}, {2.0}};
  const auto s = fit_scaler(std::span<const std::vector<double>>(ok));
  EXPECT_EQ(code_of([&] { s.apply(std::vector<double>{1.0, 2.0}); }), ErrorCode::kShapeMismatch);
}

TEST(Scaler, StandardizesRandomData) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(3.0, 2.0);
  std::vector<std::vector<double>> xs(500, std::vector<double>(4));
  for (auto& v : xs)
    for (auto& x : v) x = g(rng);
  const auto s = fit_scaler(std::span<const std::vector<double>>(xs));
  std::vector<double> mean(4, 0.0), sq(4, 0.0);
  for (const auto& v : xs) {
    const auto z = s.apply(v);
    for (int d = 0; d < 4; ++d) {
      mean[d] += z[d] / 500;
      sq[d] += z[d] * z[d] / 500;
    }
  }
  for (int d = 0; d < 4; ++d) {
    EXPECT_NEAR(mean[d], 0.0, 1e-9);
    EXPECT_NEAR(sq[d], 1.0, 1e-9);
  }
}

}  // namespace
}  // namespace facegate::features
