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

#include "facegate/audit.hpp"
#include "facegate/error.hpp"
#include "facegate/jsonl.hpp"

namespace facegate::audit {

namespace {

template <typename E, std::size_t N>
E parse_enum(const Json& v, const std::array<E, N>& values, std::string_view field,
             std::string_view where) {
  if (v.is_string()) {
    for (E e : values) {
      if (to_string(e) == v.get<std::string>()) return e;
    }
  }
  throw Error(ErrorCode::kFormatError,
              std::string(where) + ": bad value for '" + std::string(field) + "'");
}

constexpr std::array kLevels = {AnonymizationLevel::kNone, AnonymizationLevel::kPartial,
                                AnonymizationLevel::kFull};
constexpr std::array kCategories = {PersonCategory::kUploader, PersonCategory::kFriend,
                                    PersonCategory::kBystanderStar};

}  // namespace

Json to_json(const AuditImage& image) {
  Json faces = Json::array();
  for (const auto& f : image.faces) {
    Json j{{"face_id", f.face_id}};
    if (f.label) j["label"] = std::string(classifier::to_string(*f.label));
    if (f.category) j["category"] = std::string(to_string(*f.category));
    if (f.level) j["level"] = std::string(to_string(*f.level));
    if (f.coding) j["coding"] = to_json(*f.coding);
    faces.push_back(std::move(j));
  }
  Json j{{"image_id", image.image_id}, {"uploader_id", image.uploader_id}};
  if (image.verified_account) j["verified_account"] = *image.verified_account;
  if (image.profile_type) j["profile_type"] = *image.profile_type;
  if (image.celebrity_only) j["celebrity_only"] = true;
  j["faces"] = faces;
  return j;
}

AuditImage audit_image_from_json(const Json& j, std::string_view where) {
  AuditImage img;
  img.image_id = jsonl::require_string(j, "image_id", where);
  img.uploader_id = j.value("uploader_id", std::string());
  if (j.contains("verified_account")) img.verified_account = j["verified_account"].get<bool>();
  if (j.contains("profile_type")) img.profile_type = j["profile_type"].get<std::string>();
  img.celebrity_only = j.value("celebrity_only", false);
  for (const auto& fj : j.value("faces", Json::array())) {
    AuditFace f;
    f.face_id = jsonl::require_string(fj, "face_id", where);
    if (fj.contains("label")) {
      const auto& l = fj["label"];
      if (!l.is_string() || (l != "subject" && l != "bystander")) {
        throw Error(ErrorCode::kFormatError, std::string(where) + ": bad value for 'label'");
      }
      f.label = classifier::parse_label(l.get<std::string>());
    }
    if (fj.contains("category")) f.category = parse_enum(fj["category"], kCategories, "category", where);
    if (fj.contains("level")) f.level = parse_enum(fj["level"], kLevels, "level", where);
    if (fj.contains("coding")) {
      std::vector<std::string> errors;
      f.coding = coding_from_json(fj["coding"], errors);
      if (!f.coding) {
        throw Error(ErrorCode::kFormatError, std::string(where) + ": invalid coding");
      }
    }
    img.faces.push_back(std::move(f));
  }
  return img;
}

void write_audit_images(const std::filesystem::path& path, const std::vector<AuditImage>& images) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << jsonl::header(kAuditFacesSchema, 1).dump() << '\n';
  for (const auto& img : images) out << to_json(img).dump() << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

std::vector<AuditImage> load_audit_images(const std::filesystem::path& path) {
  std::vector<AuditImage> out;
  jsonl::for_each_record(path, kAuditFacesSchema, 1, [&](const Json& j, std::size_t line) {
    out.push_back(audit_image_from_json(j, jsonl::location(path.string(), line)));
  });
  return out;
}

}  // namespace facegate::audit
