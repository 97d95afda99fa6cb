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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "facegate/features.hpp"
#include "facegate/imaging.hpp"

namespace facegate::providers {

namespace detail {
class OnnxNet;  // owns the OpenCV dnn network and serializes inference
}

using features::Embedding;
using features::FaceObservation;
using features::HeadPose;
using imaging::RectRegion;

// Schema names and the newest version this build reads.
inline constexpr std::string_view kManifestSchema = "facegate.manifest";
inline constexpr std::string_view kFacesSchema = "facegate.faces";
inline constexpr std::string_view kRegionsSchema = "facegate.regions";
inline constexpr std::string_view kEmbeddingsSchema = "facegate.embeddings";
inline constexpr std::string_view kProfilesSchema = "facegate.profiles";
inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Corpus description

struct ImageManifestEntry {
  std::string image_id;
  std::filesystem::path path;
  std::optional<std::string> uploader_id;
  int width = 0;
  int height = 0;
  std::optional<bool> celebrity_only;
  std::optional<bool> verified_account;
  // Uploader profile-image type: "real_face", "no_human" or "celebrity".
  std::optional<std::string> profile_type;
};

class Manifest {
 public:
  Manifest() = default;
  explicit Manifest(std::vector<ImageManifestEntry> entries);  // throws kDuplicateId

  const std::vector<ImageManifestEntry>& entries() const { return entries_; }
  const ImageManifestEntry* find(std::string_view image_id) const;
  const ImageManifestEntry& at(std::string_view image_id) const;  // throws kDanglingReference
  std::size_t size() const { return entries_.size(); }

  // Relative image paths resolve against this directory.
  std::filesystem::path base_dir;
  std::filesystem::path resolve(const ImageManifestEntry& e) const;

 private:
  std::vector<ImageManifestEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::istream& in, std::string_view source);
void write_manifest(std::ostream& out, const Manifest& manifest);

enum class Provenance { kDetector, kManual };

struct FaceSidecar {
  std::string image_id;
  Provenance provenance = Provenance::kDetector;
  std::vector<FaceObservation> faces;
  // Optional link from a face to the manipulation region that covers it.
  std::map<std::string, std::string> region_of_face;
};

// Boxes partially outside their image are clipped; boxes entirely outside,
// eye points outside the image and out-of-range poses raise kValidationError.
// Unknown image ids raise kDanglingReference.
std::vector<FaceSidecar> load_face_sidecar(const std::filesystem::path& path,
                                           const Manifest& manifest);
std::vector<FaceSidecar> parse_face_sidecar(std::istream& in, std::string_view source,
                                            const Manifest& manifest);
void write_face_sidecar(std::ostream& out, const std::vector<FaceSidecar>& sidecars);

// All faces of each image across every sidecar record, detector records first.
// Throws kDuplicateId when a face id repeats within an image.
std::map<std::string, std::vector<FaceObservation>> faces_by_image(
    const std::vector<FaceSidecar>& sidecars);

struct ManipulationRegion {
  std::string image_id;
  std::string region_id;
  RectRegion region;
  // 2: facial and manipulated, 3: manipulated without a detected face,
  // 4: neither.
  int region_type = 4;
};

std::vector<ManipulationRegion> load_manipulation_regions(const std::filesystem::path& path,
                                                          const Manifest& manifest);
std::vector<ManipulationRegion> parse_manipulation_regions(std::istream& in,
                                                           std::string_view source,
                                                           const Manifest& manifest);

// (image_id, face_id) -> embedding.
using EmbeddingTable = std::map<std::pair<std::string, std::string>, Embedding>;

EmbeddingTable load_embedding_sidecar(const std::filesystem::path& path);
EmbeddingTable parse_embedding_sidecar(std::istream& in, std::string_view source);
void write_embedding_record(std::ostream& out, std::string_view image_id,
                            std::string_view face_id, const Embedding& embedding);

// uploader_id -> embeddings of the faces in that uploader's profile image.
using ProfileTable = std::map<std::string, std::vector<Embedding>>;
ProfileTable load_profiles(const std::filesystem::path& path);
ProfileTable parse_profiles(std::istream& in, std::string_view source);

// ---------------------------------------------------------------------------
// Model-backed providers

struct FaceContext {
  std::string_view image_id;
  const FaceObservation& face;
  const imaging::RgbImage* image = nullptr;  // required by model providers
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Embedding embed(const FaceContext& ctx) const = 0;
};

// Deterministic pseudo-embedding: a pure function of (image_id, face_id, seed).
class StubEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit StubEmbeddingProvider(std::uint64_t seed) : seed_(seed) {}
  Embedding embed(const FaceContext& ctx) const override;

 private:
  std::uint64_t seed_;
};

// Precomputed embeddings. Missing faces raise kMissingEmbedding.
class SidecarEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit SidecarEmbeddingProvider(EmbeddingTable table) : table_(std::move(table)) {}
  Embedding embed(const FaceContext& ctx) const override;

 private:
  EmbeddingTable table_;
};

// Runs an ONNX network on the RGB face crop. Input: 1x3xSxS float, RGB,
// scaled to [0,1] then normalized with ImageNet mean/std. Output: exactly 512
// values. Inference calls are serialized internally.
class OnnxEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit OnnxEmbeddingProvider(const std::filesystem::path& model, int input_size = 112);
  ~OnnxEmbeddingProvider() override;
  Embedding embed(const FaceContext& ctx) const override;

 private:
  std::unique_ptr<detail::OnnxNet> net_;
};

// Head-pose network. Input as for the embedding provider; output: three
// values (yaw, pitch, roll) in degrees.
class PoseModel {
 public:
  virtual ~PoseModel() = default;
  virtual HeadPose infer(const FaceContext& ctx) const = 0;
};

class OnnxPoseModel final : public PoseModel {
 public:
  explicit OnnxPoseModel(const std::filesystem::path& model, int input_size = 112);
  ~OnnxPoseModel() override;
  HeadPose infer(const FaceContext& ctx) const override;

 private:
  std::unique_ptr<detail::OnnxNet> net_;
};

struct PoseResolution {
  HeadPose pose;
  std::optional<std::string> warning;  // set when model output was clamped
};

// Sidecar pose when present, otherwise the model; neither -> kMissingPose.
class PoseResolver {
 public:
  explicit PoseResolver(std::shared_ptr<const PoseModel> model = nullptr)
      : model_(std::move(model)) {}
  PoseResolution resolve(const FaceContext& ctx) const;

 private:
  std::shared_ptr<const PoseModel> model_;
};

// Face detector network with post-processed output: rows of
// [x1, y1, x2, y2, score, left_eye_x, left_eye_y, right_eye_x, right_eye_y]
// in coordinates normalized to [0, 1]. Rows below the threshold are dropped.
class OnnxFaceDetector {
 public:
  OnnxFaceDetector(const std::filesystem::path& model, double threshold, int input_size = 320);
  ~OnnxFaceDetector();
  std::vector<FaceObservation> detect(const imaging::RgbImage& image,
                                      std::string_view image_id) const;
  double threshold() const { return threshold_; }

 private:
  std::unique_ptr<detail::OnnxNet> net_;
  double threshold_;
};

// Keeps detector faces whose confidence is at least the threshold; faces
// without a confidence (manual annotations) are always kept.
std::vector<FaceObservation> filter_by_confidence(std::vector<FaceObservation> faces,
                                                  double threshold);

// Model locations from FACEGATE_DETECTOR, FACEGATE_POSE, FACEGATE_EMBED.
struct ModelPaths {
  std::optional<std::filesystem::path> detector;
  std::optional<std::filesystem::path> pose;
  std::optional<std::filesystem::path> embed;

  static ModelPaths from_environment();
};

// Cosine similarity in [-1, 1]. Throws kDegenerateVector for a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const Embedding& a, const Embedding& b);

}  // namespace facegate::providers
