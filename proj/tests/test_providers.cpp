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

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "facegate/error.hpp"
#include "facegate/providers.hpp"
#include "support.hpp"

namespace facegate::providers {
namespace {

using facegate::testing::fixtures;

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

Manifest two_images() {
  std::istringstream in(
      R"({"schema":"facegate.manifest","version":1}
{"image_id":"a","path":"a.png","width":100,"height":80,"uploader_id":"u1","verified_account":true}
{"image_id":"b","path":"/abs/b.png","width":50,"height":50,"celebrity_only":true,"profile_type":"no_human"}
)");
  Manifest m = parse_manifest(in, "mem");
  m.base_dir = "/data";
  return m;
}

imaging::RgbImage solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  imaging::RgbImage img{w, h, {}};
  for (int i = 0; i < w * h; ++i) img.rgb.insert(img.rgb.end(), {r, g, b});
  return img;
}

TEST(Manifest, ParsesOptionalFields) {
  const auto m = two_images();
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at("a").uploader_id, "u1");
  EXPECT_EQ(m.at("a").verified_account, true);
  EXPECT_FALSE(m.at("a").celebrity_only.has_value());
  EXPECT_EQ(m.at("b").profile_type, "no_human");
  EXPECT_EQ(m.resolve(m.at("a")), std::filesystem::path("/data/a.png"));
  EXPECT_EQ(m.resolve(m.at("b")), std::filesystem::path("/abs/b.png"));
  EXPECT_EQ(code_of([&] { m.at("zz"); }), ErrorCode::kDanglingReference);
}

TEST(Manifest, RoundTrip) {
  const auto m = two_images();
  std::ostringstream out;
  write_manifest(out, m);
  std::istringstream in(out.str());
  const auto back = parse_manifest(in, "mem");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.at("b").celebrity_only, true);
  EXPECT_EQ(back.at("a").width, 100);
}

TEST(Manifest, Errors) {
  std::istringstream dup(R"({"image_id":"a","path":"x","width":1,"height":1}
{"image_id":"a","path":"y","width":1,"height":1})");
  EXPECT_EQ(code_of([&] { parse_manifest(dup, "mem"); }), ErrorCode::kDuplicateId);
  std::istringstream future(R"({"schema":"facegate.manifest","version":9}
{"image_id":"a","path":"x","width":1,"height":1})");
  EXPECT_EQ(code_of([&] { parse_manifest(future, "mem"); }), ErrorCode::kUnsupportedVersion);
  std::istringstream wrong(R"({"schema":"facegate.labels","version":1})");
  EXPECT_EQ(code_of([&] { parse_manifest(wrong, "mem"); }), ErrorCode::kFormatError);
  std::istringstream missing(R"({"image_id":"a","width":1,"height":1})");
  EXPECT_EQ(code_of([&] { parse_manifest(missing, "mem"); }), ErrorCode::kFormatError);
  std::istringstream garbage("{not json\n");
  EXPECT_EQ(code_of([&] { parse_manifest(garbage, "mem"); }), ErrorCode::kFormatError);
  EXPECT_EQ(code_of([] { load_manifest("/nonexistent/manifest.jsonl"); }), ErrorCode::kIoError);
}

TEST(FaceSidecar, ParsesClipsAndLinksRegions) {
  const auto m = two_images();
  std::istringstream in(
      R"({"image_id":"a","provenance":"detector","faces":[{"face_id":"f1","box":[90,70,20,20],"eye_left":[92,72],"eye_right":[98,72],"pose":[1,2,3],"confidence":0.8,"region_id":"r1"}]}
{"image_id":"a","provenance":"manual","faces":[{"face_id":"m1","box":[0,0,10,10]}]}
)");
  const auto sc = parse_face_sidecar(in, "mem", m);
  ASSERT_EQ(sc.size(), 2u);
  EXPECT_EQ(sc[0].faces[0].box, (RectRegion{90, 70, 10, 10}));
  EXPECT_TRUE(sc[0].faces[0].detected);
  EXPECT_FALSE(sc[1].faces[0].detected);
  EXPECT_EQ(sc[0].region_of_face.at("f1"), "r1");
  EXPECT_EQ(sc[0].faces[0].confidence, 0.8);

  std::ostringstream out;
  write_face_sidecar(out, sc);
  std::istringstream again(out.str());
  const auto back = parse_face_sidecar(again, "mem", m);
  EXPECT_EQ(back[0].faces[0].box, sc[0].faces[0].box);
  EXPECT_EQ(back[0].faces[0].pose->roll, 3.0);
  EXPECT_EQ(back[1].faces[0].detected, false);
  EXPECT_EQ(back[0].region_of_face, sc[0].region_of_face);

  const auto by_image = faces_by_image(sc);
  ASSERT_EQ(by_image.at("a").size(), 2u);
  EXPECT_EQ(by_image.at("a")[0].face_id, "f1");
}

TEST(FaceSidecar, ValidationErrors) {
  const auto m = two_images();
  auto parse = [&](const std::string& text) {
    std::istringstream in(text);
    return parse_face_sidecar(in, "mem", m);
  };
  EXPECT_EQ(code_of([&] { parse(R"({"image_id":"zz","faces":[]})"); }),
            ErrorCode::kDanglingReference);
  EXPECT_EQ(code_of([&] { parse(R"({"image_id":"a","faces":[{"face_id":"f","box":[200,200,5,5]}]})"); }),
            ErrorCode::kValidationError);
  EXPECT_EQ(code_of([&] {
              parse(R"({"image_id":"a","faces":[{"face_id":"f","box":[0,0,5,5],"eye_left":[101,1]}]})");
            }),
            ErrorCode::kValidationError);
  EXPECT_EQ(code_of([&] {
              parse(R"({"image_id":"a","faces":[{"face_id":"f","box":[0,0,5,5],"pose":[181,0,0]}]})");
            }),
            ErrorCode::kValidationError);
  EXPECT_EQ(code_of([&] {
              parse(R"({"image_id":"a","faces":[{"face_id":"f","box":[0,0,5,5]},{"face_id":"f","box":[0,0,5,5]}]})");
            }),
            ErrorCode::kDuplicateId);
  EXPECT_EQ(code_of([&] { parse(R"({"image_id":"a","faces":[{"face_id":"f","box":[0,0,5]}]})"); }),
            ErrorCode::kFormatError);

  auto sc = parse(R"({"image_id":"a","faces":[{"face_id":"f","box":[0,0,5,5]}]}
{"image_id":"a","provenance":"manual","faces":[{"face_id":"f","box":[0,0,5,5]}]})");
  EXPECT_EQ(code_of([&] { faces_by_image(sc); }), ErrorCode::kDuplicateId);
}

TEST(Regions, ParseAndValidate) {
  const auto m = two_images();
  auto parse = [&](const std::string& text) {
    std::istringstream in(text);
    return parse_manipulation_regions(in, "mem", m);
  };
  const auto r = parse(R"({"image_id":"a","region_id":"r1","region_type":3,"box":[1,2,3,4]})");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].region, (RectRegion{1, 2, 3, 4}));
  EXPECT_EQ(r[0].region_type, 3);
  EXPECT_EQ(code_of([&] { parse(R"({"image_id":"a","region_id":"r1","region_type":1,"box":[1,2,3,4]})"); }),
            ErrorCode::kFormatError);
  EXPECT_EQ(code_of([&] { parse(R"({"image_id":"a","region_id":"r1","region_type":2,"box":[90,2,30,4]})"); }),
            ErrorCode::kValidationError);
  EXPECT_EQ(code_of([&] {
              parse(R"({"image_id":"a","region_id":"r1","region_type":2,"box":[1,2,3,4]}
{"image_id":"a","region_id":"r1","region_type":2,"box":[1,2,3,4]})");
            }),
            ErrorCode::kDuplicateId);
  EXPECT_EQ(code_of([&] { parse(R"({"image_id":"q","region_id":"r1","region_type":2,"box":[1,2,3,4]})"); }),
            ErrorCode::kDanglingReference);
}

TEST(Embeddings, SidecarAndProfiles) {
  std::string vec = "[";
  for (int i = 0; i < 512; ++i) vec += (i ? "," : "") + std::to_string(i == 3 ? 2 : 0);
  vec += "]";
  std::istringstream in(R"({"image_id":"a","face_id":"f1","embedding":)" + vec + "}\n");
  auto table = parse_embedding_sidecar(in, "mem");
  ASSERT_EQ(table.size(), 1u);
  const auto& e = table.at({"a", "f1"});
  EXPECT_EQ(e.values[3], 2.0);
  EXPECT_EQ(e.source, features::EmbeddingSource::kSidecar);

  std::ostringstream out;
  write_embedding_record(out, "a", "f2", e);
  std::istringstream again(out.str());
  EXPECT_EQ(parse_embedding_sidecar(again, "mem").at({"a", "f2"}).values, e.values);

  std::istringstream prof(R"({"uploader_id":"u","embeddings":[)" + vec + "," + vec + "]}\n");
  EXPECT_EQ(parse_profiles(prof, "mem").at("u").size(), 2u);

  std::istringstream short_vec(R"({"image_id":"a","face_id":"f1","embedding":[1,2,3]})");
  EXPECT_EQ(code_of([&] { parse_embedding_sidecar(short_vec, "mem"); }), ErrorCode::kFormatError);

  SidecarEmbeddingProvider provider(table);
  features::FaceObservation f1{.face_id = "f1"};
  features::FaceObservation f9{.face_id = "f9"};
  EXPECT_EQ(provider.embed({"a", f1}).values[3], 2.0);
  EXPECT_EQ(code_of([&] { provider.embed({"a", f9}); }), ErrorCode::kMissingEmbedding);
}

TEST(StubEmbedding, DeterministicAndSeeded) {
  features::FaceObservation f{.face_id = "f1"};
  features::FaceObservation g{.face_id = "f2"};
  StubEmbeddingProvider p(7), q(8);
  const auto a = p.embed({"img", f});
  EXPECT_EQ(a.values.size(), 512u);
  EXPECT_EQ(a.values, p.embed({"img", f}).values);
  EXPECT_NE(a.values, q.embed({"img", f}).values);
  EXPECT_NE(a.values, p.embed({"img", g}).values);
  EXPECT_NE(a.values, p.embed({"img2", f}).values);
  for (double v : a.values) {
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Cosine, Values) {
  std::vector<double> a{1, 0}, b{0, 2}, c{-3, 0}, z{0, 0};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, c), -1.0);
  EXPECT_EQ(code_of([&] { cosine_similarity(a, z); }), ErrorCode::kDegenerateVector);
}

TEST(Confidence, FilterKeepsManualFaces) {
  std::vector<features::FaceObservation> faces(3);
  faces[0].confidence = 0.9;
  faces[1].confidence = 0.2;
  faces[2].detected = false;
  EXPECT_EQ(filter_by_confidence(faces, 0.5).size(), 2u);
  EXPECT_EQ(filter_by_confidence(faces, 0.1).size(), 3u);
}

TEST(PoseResolver, SidecarPoseWinsAndMissingPoseFails) {
  features::FaceObservation f{.face_id = "f"};
  f.pose = HeadPose{1, 2, 3};
  PoseResolver none;
  EXPECT_EQ(none.resolve({"i", f}).pose.pitch, 2.0);
  f.pose.reset();
  EXPECT_EQ(code_of([&] { none.resolve({"i", f}); }), ErrorCode::kMissingPose);
}

// Oracle for the fixture networks: a flat crop reduces to one normalized
// value per channel, followed by the stored affine map.
std::array<double, 3> normalized(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double mean[3] = {0.485, 0.456, 0.406}, sd[3] = {0.229, 0.224, 0.225};
  const double v[3] = {r / 255.0, g / 255.0, b / 255.0};
  return {(v[0] - mean[0]) / sd[0], (v[1] - mean[1]) / sd[1], (v[2] - mean[2]) / sd[2]};
}

TEST(OnnxEmbedding, MatchesAffineOracle) {
  std::ifstream w(fixtures() / "onnx" / "embed_weights.txt");
  std::vector<std::array<double, 4>> rows(512);
  for (auto& row : rows)
    for (double& x : row) w >> x;
  ASSERT_TRUE(w);

  OnnxEmbeddingProvider provider(fixtures() / "onnx" / "embed.onnx");
  const auto img = solid(64, 48, 200, 30, 90);
  features::FaceObservation f{.face_id = "f", .box = {8, 4, 30, 30}};
  const auto e = provider.embed({"img", f, &img});
  EXPECT_EQ(e.source, features::EmbeddingSource::kModel);
  const auto c = normalized(200, 30, 90);
  for (std::size_t i = 0; i < 512; ++i) {
    const double expected = rows[i][0] * c[0] + rows[i][1] * c[1] + rows[i][2] * c[2] + rows[i][3];
    ASSERT_NEAR(e.values[i], expected, 1e-3) << i;  // float32 pooling over 112x112
  }
  EXPECT_EQ(code_of([&] { provider.embed({"img", f}); }), ErrorCode::kProviderError);
}

TEST(OnnxEmbedding, WrongOutputLengthAndBadFiles) {
  OnnxEmbeddingProvider short_model(fixtures() / "onnx" / "embed_short.onnx");
  const auto img = solid(32, 32, 1, 2, 3);
  features::FaceObservation f{.face_id = "f", .box = {0, 0, 32, 32}};
  EXPECT_EQ(code_of([&] { short_model.embed({"img", f, &img}); }), ErrorCode::kProviderError);
  EXPECT_EQ(code_of([] { OnnxEmbeddingProvider p(fixtures() / "onnx" / "not_a_model.onnx"); }),
            ErrorCode::kProviderError);
  EXPECT_EQ(code_of([] { OnnxEmbeddingProvider p("/nonexistent/model.onnx"); }),
            ErrorCode::kProviderError);
}

TEST(OnnxPose, InRangeAndClamped) {
  const auto img = solid(40, 40, 10, 20, 30);
  features::FaceObservation f{.face_id = "f", .box = {0, 0, 40, 40}};
  PoseResolver ok(std::make_shared<OnnxPoseModel>(fixtures() / "onnx" / "pose.onnx"));
  const auto r = ok.resolve({"img", f, &img});
  EXPECT_NEAR(r.pose.yaw, 10.0, 1e-5);
  EXPECT_NEAR(r.pose.pitch, -5.0, 1e-5);
  EXPECT_FALSE(r.warning.has_value());

  PoseResolver wide(std::make_shared<OnnxPoseModel>(fixtures() / "onnx" / "pose_wide.onnx"));
  const auto c = wide.resolve({"img", f, &img});
  EXPECT_EQ(c.pose.yaw, 180.0);
  EXPECT_EQ(c.pose.pitch, -180.0);
  EXPECT_NEAR(c.pose.roll, 7.0, 1e-5);
  ASSERT_TRUE(c.warning.has_value());
  EXPECT_NE(c.warning->find("clamped"), std::string::npos);
}

TEST(OnnxDetector, RowsThresholdAndScaling) {
  const auto img = solid(200, 100, 50, 50, 50);
  OnnxFaceDetector strict(fixtures() / "onnx" / "detector.onnx", 0.5);
  const auto faces = strict.detect(img, "img");
  ASSERT_EQ(faces.size(), 1u);
  EXPECT_EQ(faces[0].box, (RectRegion{50, 25, 50, 25}));
  EXPECT_NEAR(faces[0].eye_left->x, 64.0, 1e-3);
  EXPECT_NEAR(faces[0].eye_right->y, 35.0, 1e-3);
  EXPECT_NEAR(*faces[0].confidence, 0.9, 1e-6);
  EXPECT_TRUE(faces[0].detected);

  OnnxFaceDetector loose(fixtures() / "onnx" / "detector.onnx", 0.1);
  const auto both = loose.detect(img, "img");
  ASSERT_EQ(both.size(), 2u);
  EXPECT_EQ(both[1].box, (RectRegion{120, 10, 20, 10}));
  EXPECT_NE(both[0].face_id, both[1].face_id);
  EXPECT_EQ(filter_by_confidence(both, 0.5).size(), 1u);
}

TEST(ModelPaths, FromEnvironment) {
  ::setenv("FACEGATE_EMBED", "/models/e.onnx", 1);
  ::setenv("FACEGATE_POSE", "", 1);
  ::unsetenv("FACEGATE_DETECTOR");
  const auto p = ModelPaths::from_environment();
  EXPECT_EQ(p.embed, std::filesystem::path("/models/e.onnx"));
  EXPECT_FALSE(p.pose.has_value());
  EXPECT_FALSE(p.detector.has_value());
  ::unsetenv("FACEGATE_EMBED");
  ::unsetenv("FACEGATE_POSE");
}

}  // namespace
}  // namespace facegate::providers
