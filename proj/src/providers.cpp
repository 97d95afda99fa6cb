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

#include "facegate/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "facegate/error.hpp"
#include "facegate/jsonl.hpp"
#include "facegate/seed.hpp"

namespace facegate::providers {

using jsonl::Json;

namespace {

std::optional<bool> optional_bool(const Json& r, const char* field, const std::string& where) {
  const auto it = r.find(field);
  if (it == r.end() || it->is_null()) return std::nullopt;
  if (!it->is_boolean()) {
    throw Error(ErrorCode::kFormatError, where + ": field '" + field + "' must be a boolean");
  }
  return it->get<bool>();
}

std::optional<std::string> optional_string(const Json& r, const char* field,
                                           const std::string& where) {
  const auto it = r.find(field);
  if (it == r.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::kFormatError, where + ": field '" + field + "' must be a string");
  }
  return it->get<std::string>();
}

std::vector<double> number_array(const Json& v, std::size_t n, const std::string& field,
                                 const std::string& where) {
  if (!v.is_array() || v.size() != n) {
    throw Error(ErrorCode::kFormatError, where + ": field '" + field + "' must be an array of " +
                                             std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  out.reserve(n);
  for (const auto& x : v) {
    if (!x.is_number()) {
      throw Error(ErrorCode::kFormatError, where + ": field '" + field + "' must hold numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

Embedding parse_embedding(const Json& v, const std::string& where) {
  const auto values = number_array(v, features::kEmbeddingDim, "embedding", where);
  Embedding e;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kFormatError, where + ": embedding holds a non-finite value");
    }
    e.values[i] = values[i];
  }
  e.source = features::EmbeddingSource::kSidecar;
  return e;
}

bool inside(const features::Point& p, int w, int h) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= w && p.y <= h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

Manifest::Manifest(std::vector<ImageManifestEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].image_id, i).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "image id '" + entries_[i].image_id + "' appears more than once");
    }
  }
}

const ImageManifestEntry* Manifest::find(std::string_view image_id) const {
  const auto it = index_.find(std::string(image_id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const ImageManifestEntry& Manifest::at(std::string_view image_id) const {
  const auto* e = find(image_id);
  if (!e) {
    throw Error(ErrorCode::kDanglingReference,
                "image id '" + std::string(image_id) + "' is not in the manifest");
  }
  return *e;
}

std::filesystem::path Manifest::resolve(const ImageManifestEntry& e) const {
  return e.path.is_absolute() ? e.path : base_dir / e.path;
}

Manifest parse_manifest(std::istream& in, std::string_view source) {
  std::vector<ImageManifestEntry> entries;
  std::set<std::string> seen;
  jsonl::for_each_record(in, source, kManifestSchema, kSchemaVersion,
                         [&](const Json& r, std::size_t line) {
    const std::string where = jsonl::location(source, line);
    ImageManifestEntry e;
    e.image_id = jsonl::require_string(r, "image_id", where);
    e.path = jsonl::require_string(r, "path", where);
    e.width = jsonl::require_int(r, "width", where);
    e.height = jsonl::require_int(r, "height", where);
    if (e.width < 1 || e.height < 1) {
      throw Error(ErrorCode::kFormatError, where + ": width and height must be >= 1");
    }
    e.uploader_id = optional_string(r, "uploader_id", where);
    e.celebrity_only = optional_bool(r, "celebrity_only", where);
    e.verified_account = optional_bool(r, "verified_account", where);
    e.profile_type = optional_string(r, "profile_type", where);
    if (!seen.insert(e.image_id).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate image id '" + e.image_id + "'");
    }
    entries.push_back(std::move(e));
  });
  return Manifest(std::move(entries));
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  Manifest m = parse_manifest(in, path.string());
  m.base_dir = path.parent_path();
  return m;
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  out << jsonl::header(kManifestSchema, kSchemaVersion).dump() << '\n';
  for (const auto& e : manifest.entries()) {
    Json r{{"image_id", e.image_id},
           {"path", e.path.generic_string()},
           {"width", e.width},
           {"height", e.height}};
    if (e.uploader_id) r["uploader_id"] = *e.uploader_id;
    if (e.celebrity_only) r["celebrity_only"] = *e.celebrity_only;
    if (e.verified_account) r["verified_account"] = *e.verified_account;
    if (e.profile_type) r["profile_type"] = *e.profile_type;
    out << r.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Face sidecar

std::vector<FaceSidecar> parse_face_sidecar(std::istream& in, std::string_view source,
                                            const Manifest& manifest) {
  std::vector<FaceSidecar> out;
  jsonl::for_each_record(in, source, kFacesSchema, kSchemaVersion,
                         [&](const Json& r, std::size_t line) {
    const std::string where = jsonl::location(source, line);
    FaceSidecar sc;
    sc.image_id = jsonl::require_string(r, "image_id", where);
    const auto* entry = manifest.find(sc.image_id);
    if (!entry) {
      throw Error(ErrorCode::kDanglingReference,
                  where + ": image id '" + sc.image_id + "' is not in the manifest");
    }
    const std::string provenance = r.value("provenance", std::string("detector"));
    if (provenance == "detector") {
      sc.provenance = Provenance::kDetector;
    } else if (provenance == "manual") {
      sc.provenance = Provenance::kManual;
    } else {
      throw Error(ErrorCode::kFormatError, where + ": provenance must be detector or manual");
    }
    const Json& faces = jsonl::require(r, "faces", where);
    if (!faces.is_array()) throw Error(ErrorCode::kFormatError, where + ": faces must be an array");

    std::set<std::string> ids;
    for (const Json& f : faces) {
      FaceObservation obs;
      obs.face_id = jsonl::require_string(f, "face_id", where);
      const std::string face_where = where + " face '" + obs.face_id + "'";
      if (!ids.insert(obs.face_id).second) {
        throw Error(ErrorCode::kDuplicateId, face_where + ": duplicate face id");
      }
      const auto b = number_array(jsonl::require(f, "box", face_where), 4, "box", face_where);
      const RectRegion raw{static_cast<int>(std::lround(b[0])), static_cast<int>(std::lround(b[1])),
                           static_cast<int>(std::lround(b[2])), static_cast<int>(std::lround(b[3]))};
      const auto clipped = imaging::clip(raw, entry->width, entry->height);
      if (!clipped) {
        throw Error(ErrorCode::kValidationError, face_where + ": box lies outside the image");
      }
      obs.box = *clipped;
      for (auto [field, slot] : {std::pair{"eye_left", &obs.eye_left},
                                 std::pair{"eye_right", &obs.eye_right}}) {
        if (f.contains(field) && !f[field].is_null()) {
          const auto p = number_array(f[field], 2, field, face_where);
          const features::Point pt{p[0], p[1]};
          if (!inside(pt, entry->width, entry->height)) {
            throw Error(ErrorCode::kValidationError,
                        face_where + ": " + field + " lies outside the image");
          }
          *slot = pt;
        }
      }
      if (f.contains("pose") && !f["pose"].is_null()) {
        const auto p = number_array(f["pose"], 3, "pose", face_where);
        const HeadPose pose{p[0], p[1], p[2]};
        if (!pose.valid()) {
          throw Error(ErrorCode::kValidationError, face_where + ": pose outside [-180, 180]");
        }
        obs.pose = pose;
      }
      if (f.contains("confidence") && !f["confidence"].is_null()) {
        const double c = jsonl::require_number(f, "confidence", face_where);
        if (c < 0.0 || c > 1.0) {
          throw Error(ErrorCode::kValidationError, face_where + ": confidence outside [0, 1]");
        }
        obs.confidence = c;
      }
      obs.detected = f.value("detected", sc.provenance == Provenance::kDetector);
      if (auto link = optional_string(f, "region_id", face_where)) {
        sc.region_of_face[obs.face_id] = *link;
      }
      sc.faces.push_back(std::move(obs));
    }
    out.push_back(std::move(sc));
  });
  return out;
}

std::vector<FaceSidecar> load_face_sidecar(const std::filesystem::path& path,
                                           const Manifest& manifest) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_face_sidecar(in, path.string(), manifest);
}

void write_face_sidecar(std::ostream& out, const std::vector<FaceSidecar>& sidecars) {
  out << jsonl::header(kFacesSchema, kSchemaVersion).dump() << '\n';
  for (const auto& sc : sidecars) {
    Json faces = Json::array();
    for (const auto& f : sc.faces) {
      Json jf{{"face_id", f.face_id}, {"box", {f.box.x, f.box.y, f.box.w, f.box.h}}};
      if (f.eye_left) jf["eye_left"] = {f.eye_left->x, f.eye_left->y};
      if (f.eye_right) jf["eye_right"] = {f.eye_right->x, f.eye_right->y};
      if (f.pose) jf["pose"] = {f.pose->yaw, f.pose->pitch, f.pose->roll};
      if (f.confidence) jf["confidence"] = *f.confidence;
      if (f.detected != (sc.provenance == Provenance::kDetector)) jf["detected"] = f.detected;
      if (auto it = sc.region_of_face.find(f.face_id); it != sc.region_of_face.end()) {
        jf["region_id"] = it->second;
      }
      faces.push_back(std::move(jf));
    }
    out << Json{{"image_id", sc.image_id},
                {"provenance", sc.provenance == Provenance::kDetector ? "detector" : "manual"},
                {"faces", std::move(faces)}}
               .dump()
        << '\n';
  }
}

std::map<std::string, std::vector<FaceObservation>> faces_by_image(
    const std::vector<FaceSidecar>& sidecars) {
  std::map<std::string, std::vector<FaceObservation>> out;
  std::map<std::string, std::set<std::string>> ids;
  for (Provenance pass : {Provenance::kDetector, Provenance::kManual}) {
    for (const auto& sc : sidecars) {
      if (sc.provenance != pass) continue;
      auto& list = out[sc.image_id];
      for (const auto& f : sc.faces) {
        if (!ids[sc.image_id].insert(f.face_id).second) {
          throw Error(ErrorCode::kDuplicateId,
                      "face id '" + f.face_id + "' repeats in image '" + sc.image_id + "'");
        }
        list.push_back(f);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manipulation regions

std::vector<ManipulationRegion> parse_manipulation_regions(std::istream& in,
                                                           std::string_view source,
                                                           const Manifest& manifest) {
  std::vector<ManipulationRegion> out;
  std::set<std::pair<std::string, std::string>> seen;
  jsonl::for_each_record(in, source, kRegionsSchema, kSchemaVersion,
                         [&](const Json& r, std::size_t line) {
    const std::string where = jsonl::location(source, line);
    ManipulationRegion m;
    m.image_id = jsonl::require_string(r, "image_id", where);
    m.region_id = jsonl::require_string(r, "region_id", where);
    m.region_type = jsonl::require_int(r, "region_type", where);
    if (m.region_type < 2 || m.region_type > 4) {
      throw Error(ErrorCode::kFormatError,
                  where + ": region_type must be 2, 3 or 4, got " + std::to_string(m.region_type));
    }
    const auto* entry = manifest.find(m.image_id);
    if (!entry) {
      throw Error(ErrorCode::kDanglingReference,
                  where + ": image id '" + m.image_id + "' is not in the manifest");
    }
    const auto b = number_array(jsonl::require(r, "box", where), 4, "box", where);
    const RectRegion raw{static_cast<int>(std::lround(b[0])), static_cast<int>(std::lround(b[1])),
                         static_cast<int>(std::lround(b[2])), static_cast<int>(std::lround(b[3]))};
    const auto clipped = imaging::clip(raw, entry->width, entry->height);
    if (!clipped || !(*clipped == raw)) {
      throw Error(ErrorCode::kValidationError, where + ": region must lie inside the image");
    }
    m.region = raw;
    if (!seen.emplace(m.image_id, m.region_id).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate region id '" + m.region_id + "'");
    }
    out.push_back(std::move(m));
  });
  return out;
}

std::vector<ManipulationRegion> load_manipulation_regions(const std::filesystem::path& path,
                                                          const Manifest& manifest) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_manipulation_regions(in, path.string(), manifest);
}

// ---------------------------------------------------------------------------
// Embedding sidecar and profiles

EmbeddingTable parse_embedding_sidecar(std::istream& in, std::string_view source) {
  EmbeddingTable table;
  jsonl::for_each_record(in, source, kEmbeddingsSchema, kSchemaVersion,
                         [&](const Json& r, std::size_t line) {
    const std::string where = jsonl::location(source, line);
    auto key = std::pair{jsonl::require_string(r, "image_id", where),
                         jsonl::require_string(r, "face_id", where)};
    Embedding e = parse_embedding(jsonl::require(r, "embedding", where), where);
    if (!table.emplace(std::move(key), e).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate embedding record");
    }
  });
  return table;
}

EmbeddingTable load_embedding_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_embedding_sidecar(in, path.string());
}

void write_embedding_record(std::ostream& out, std::string_view image_id,
                            std::string_view face_id, const Embedding& embedding) {
  out << Json{{"image_id", image_id},
              {"face_id", face_id},
              {"embedding", embedding.values}}
             .dump()
      << '\n';
}

ProfileTable parse_profiles(std::istream& in, std::string_view source) {
  ProfileTable table;
  jsonl::for_each_record(in, source, kProfilesSchema, kSchemaVersion,
                         [&](const Json& r, std::size_t line) {
    const std::string where = jsonl::location(source, line);
    const std::string uploader = jsonl::require_string(r, "uploader_id", where);
    const Json& list = jsonl::require(r, "embeddings", where);
    if (!list.is_array()) {
      throw Error(ErrorCode::kFormatError, where + ": embeddings must be an array");
    }
    auto& dst = table[uploader];
    for (const auto& e : list) dst.push_back(parse_embedding(e, where));
  });
  return table;
}

ProfileTable load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_profiles(in, path.string());
}

// ---------------------------------------------------------------------------
// Providers without model files

Embedding StubEmbeddingProvider::embed(const FaceContext& ctx) const {
  std::uint64_t state = fnv1a(ctx.face.face_id, fnv1a("\x1f", fnv1a(ctx.image_id))) ^ seed_;
  Embedding e;
  for (double& v : e.values) {
    // 53 random mantissa bits mapped onto [-1, 1).
    v = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
  }
  e.source = features::EmbeddingSource::kStub;
  return e;
}

Embedding SidecarEmbeddingProvider::embed(const FaceContext& ctx) const {
  const auto it = table_.find({std::string(ctx.image_id), ctx.face.face_id});
  if (it == table_.end()) {
    throw Error(ErrorCode::kMissingEmbedding, "no embedding for face '" + ctx.face.face_id +
                                                  "' in image '" + std::string(ctx.image_id) +
                                                  "'");
  }
  return it->second;
}

PoseResolution PoseResolver::resolve(const FaceContext& ctx) const {
  if (ctx.face.pose) return {*ctx.face.pose, std::nullopt};
  if (!model_) {
    throw Error(ErrorCode::kMissingPose,
                "face '" + ctx.face.face_id + "' has no sidecar pose and no pose model is set");
  }
  HeadPose raw = model_->infer(ctx);
  PoseResolution res{raw, std::nullopt};
  bool clamped = false;
  for (double* a : {&res.pose.yaw, &res.pose.pitch, &res.pose.roll}) {
    if (!std::isfinite(*a)) {
      throw Error(ErrorCode::kProviderError,
                  "pose model returned a non-finite angle for face '" + ctx.face.face_id + "'");
    }
    if (*a < -180.0 || *a > 180.0) {
      *a = std::clamp(*a, -180.0, 180.0);
      clamped = true;
    }
  }
  if (clamped) {
    res.warning = "pose for face '" + ctx.face.face_id + "' in image '" +
                  std::string(ctx.image_id) + "' clamped to [-180, 180] (model output " +
                  std::to_string(raw.yaw) + ", " + std::to_string(raw.pitch) + ", " +
                  std::to_string(raw.roll) + ")";
  }
  return res;
}

std::vector<FaceObservation> filter_by_confidence(std::vector<FaceObservation> faces,
                                                  double threshold) {
  std::erase_if(faces, [&](const FaceObservation& f) {
    return f.confidence && *f.confidence < threshold;
  });
  return faces;
}

ModelPaths ModelPaths::from_environment() {
  ModelPaths paths;
  auto read = [](const char* name) -> std::optional<std::filesystem::path> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::filesystem::path(v);
  };
  paths.detector = read("FACEGATE_DETECTOR");
  paths.pose = read("FACEGATE_POSE");
  paths.embed = read("FACEGATE_EMBED");
  return paths;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kShapeMismatch, "cosine similarity of vectors of different lengths");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorCode::kDegenerateVector, "cosine similarity of a zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

}  // namespace facegate::providers
