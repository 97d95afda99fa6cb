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

#include <algorithm>
#include <map>

#include "facegate/audit.hpp"
#include "facegate/error.hpp"

namespace facegate::audit {

namespace {

double iou(const imaging::RectRegion& a, const imaging::RectRegion& b) {
  const int x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.w, b.x + b.w), y1 = std::min(a.y + a.h, b.y + b.h);
  if (x1 <= x0 || y1 <= y0) return 0.0;
  const double inter = static_cast<double>(x1 - x0) * (y1 - y0);
  return inter / (static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter);
}

}  // namespace

PipelineResult build_audit_images(const PipelineInputs& in, const PipelineConfig& cfg) {
  PipelineResult out;
  const auto faces = providers::faces_by_image(in.sidecars);

  std::map<std::pair<std::string, std::string>, std::string> region_link;
  for (const auto& sc : in.sidecars) {
    for (const auto& [face_id, region_id] : sc.region_of_face) {
      region_link[{sc.image_id, face_id}] = region_id;
    }
  }
  std::map<std::string, std::vector<const providers::ManipulationRegion*>> regions_by_image;
  std::map<std::pair<std::string, std::string>, const providers::ManipulationRegion*> region_index;
  for (const auto& r : in.regions) {
    regions_by_image[r.image_id].push_back(&r);
    region_index[{r.image_id, r.region_id}] = &r;
  }

  for (const auto& entry : in.manifest.entries()) {
    AuditImage img;
    img.image_id = entry.image_id;
    img.uploader_id = entry.uploader_id.value_or("");
    img.verified_account = entry.verified_account;
    img.profile_type = entry.profile_type;
    img.celebrity_only = entry.celebrity_only.value_or(false);
    if (img.celebrity_only) {
      out.images.push_back(std::move(img));
      continue;
    }
    const auto fit = faces.find(entry.image_id);
    bool excluded = false;
    if (fit != faces.end()) {
      for (const auto& face : fit->second) {
        // Locate the manipulation region covering this face.
        const providers::ManipulationRegion* region = nullptr;
        if (auto l = region_link.find({entry.image_id, face.face_id}); l != region_link.end()) {
          const auto r = region_index.find({entry.image_id, l->second});
          if (r == region_index.end()) {
            throw Error(ErrorCode::kDanglingReference, "face '" + face.face_id +
                                                           "' links to unknown region '" +
                                                           l->second + "'");
          }
          region = r->second;
        } else if (auto rs = regions_by_image.find(entry.image_id); rs != regions_by_image.end()) {
          double best = cfg.iou_threshold;
          for (const auto* r : rs->second) {
            if (r->region_type == 4) continue;
            const double v = iou(face.box, r->region);
            if (v >= best) {
              best = v;
              region = r;
            }
          }
        }

        AuditFace af;
        af.face_id = face.face_id;
        bool manipulated = false;
        ManipulationCoding coding;
        std::optional<Label> label;
        if (region) {
          const std::string task = entry.image_id + ":" + region->region_id;
          const auto records = in.annotations.records_for(task);
          if (records.size() < cfg.n_annotators) {
            out.warnings.push_back("image '" + entry.image_id + "' excluded: task '" + task +
                                   "' has " + std::to_string(records.size()) + " of " +
                                   std::to_string(cfg.n_annotators) + " codings");
            excluded = true;
            break;
          }
          const ConsensusResult c = consensus(records, cfg.n_annotators);
          const bool verification_open =
              std::any_of(c.unresolved.begin(), c.unresolved.end(), [](const std::string& f) {
                return f == "face_verification" || f == "manipulation_verification";
              });
          if (verification_open) {
            out.warnings.push_back("image '" + entry.image_id + "' excluded: task '" + task +
                                   "' has no verification consensus");
            excluded = true;
            break;
          }
          if (c.coding.face_verification == FaceVerification::kNoFace) {
            out.warnings.push_back("face '" + face.face_id + "' skipped: annotators found no face");
            continue;
          }
          manipulated = c.coding.manipulated();
          coding = c.coding;
          label = c.label;
        }

        FaceClass cls;
        try {
          cls = face_class(face.detected, manipulated);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNotAFace) throw;
          out.warnings.push_back("face '" + face.face_id + "' skipped: " + e.what());
          continue;
        }
        af.level = anonymization_level(cls, coding);
        if (manipulated) af.coding = coding;

        if (!label) {
          if (auto l = in.labels.find({entry.image_id, face.face_id}); l != in.labels.end()) {
            label = l->second;
          }
        }
        af.label = label;
        bool match = false;
        if (auto e = in.embeddings.find({entry.image_id, face.face_id});
            e != in.embeddings.end() && entry.uploader_id) {
          if (auto p = in.profiles.find(*entry.uploader_id); p != in.profiles.end()) {
            match = match_uploader(e->second, p->second, cfg.tau);
          }
        }
        if (label) af.category = categorize_person(*label, match);
        img.faces.push_back(std::move(af));
      }
    }
    if (excluded) {
      ++out.excluded_images;
      continue;
    }
    out.images.push_back(std::move(img));
  }
  return out;
}

}  // namespace facegate::audit
