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
#include <set>

#include "facegate/annotation_service.hpp"
#include "facegate/error.hpp"

namespace facegate::service {

namespace {

double iou(const imaging::RectRegion& a, const imaging::RectRegion& b) {
  const int x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.w, b.x + b.w), y1 = std::min(a.y + a.h, b.y + b.h);
  if (x1 <= x0 || y1 <= y0) return 0.0;
  const double inter = static_cast<double>(x1 - x0) * (y1 - y0);
  return inter / (static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter);
}

Json box_json(const imaging::RectRegion& r) { return Json::array({r.x, r.y, r.w, r.h}); }

template <typename T, typename F>
std::string joined(const std::set<T>& values, F name) {
  std::string out;
  for (const T& v : values) {
    if (!out.empty()) out += "+";
    out += name(v);
  }
  return out.empty() ? "-" : out;
}

using Extractor = std::optional<std::string> (*)(const AnnotationRecord&);

const std::vector<std::pair<const char*, Extractor>>& fields() {
  static const std::vector<std::pair<const char*, Extractor>> f = {
      {"face_verification",
       [](const AnnotationRecord& r) -> std::optional<std::string> {
         return std::string(audit::to_string(r.coding.face_verification));
       }},
      {"manipulation_verification",
       [](const AnnotationRecord& r) -> std::optional<std::string> {
         return std::string(audit::to_string(r.coding.manipulation_verification));
       }},
      {"intentions",
       [](const AnnotationRecord& r) -> std::optional<std::string> {
         return joined(r.coding.intentions,
                       [](audit::Intention v) { return std::string(audit::to_string(v)); });
       }},
      {"parts",
       [](const AnnotationRecord& r) -> std::optional<std::string> {
         return joined(r.coding.parts, [](audit::Part v) { return std::string(audit::to_string(v)); });
       }},
      {"methods",
       [](const AnnotationRecord& r) -> std::optional<std::string> {
         return joined(r.coding.methods,
                       [](audit::Method v) { return std::string(audit::to_string(v)); });
       }},
      {"label",
       [](const AnnotationRecord& r) -> std::optional<std::string> {
         if (!r.label) return std::nullopt;
         return std::string(classifier::to_string(*r.label));
       }},
  };
  return f;
}

Json kappa_json(const evaluation::KappaResult& k) {
  Json j{{"observed", k.observed}, {"expected", k.expected}};
  j["kappa"] = k.kappa ? Json(*k.kappa) : Json(nullptr);
  return j;
}

Json consensus_json(const audit::ConsensusResult& c) {
  Json j{{"coding", audit::to_json(c.coding)},
         {"escalated", c.escalated},
         {"unresolved", c.unresolved},
         {"records", c.records}};
  j["label"] = c.label ? Json(std::string(classifier::to_string(*c.label))) : Json(nullptr);
  return j;
}

}  // namespace

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::kPending: return "pending";
    case TaskStatus::kPartiallyCoded: return "partially_coded";
    case TaskStatus::kResolved: return "resolved";
    case TaskStatus::kEscalated: return "escalated";
  }
  return "?";
}

std::optional<TaskStatus> parse_status(std::string_view text) {
  for (auto s : {TaskStatus::kPending, TaskStatus::kPartiallyCoded, TaskStatus::kResolved,
                 TaskStatus::kEscalated}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

Json agreement_report(const std::vector<std::vector<AnnotationRecord>>& completed) {
  Json out{{"tasks", completed.size()}};
  Json by_field = Json::object();
  for (const auto& [name, extract] : fields()) {
    // Fleiss over items where every record carries a value.
    std::map<std::string, std::size_t> categories;
    std::vector<std::vector<std::string>> items;
    for (const auto& task : completed) {
      std::vector<std::string> values;
      for (const auto& r : task) {
        if (auto v = extract(r)) values.push_back(*v);
      }
      if (values.size() != task.size() || values.size() < 2) continue;
      for (const auto& v : values) categories.try_emplace(v, 0);
      items.push_back(std::move(values));
    }
    std::size_t next = 0;
    for (auto& [v, i] : categories) i = next++;
    Json field{{"items", items.size()}};
    field["fleiss"] = nullptr;
    if (!items.empty()) {
      std::vector<std::vector<long long>> ratings;
      bool uniform = true;
      for (const auto& values : items) {
        std::vector<long long> row(categories.size(), 0);
        for (const auto& v : values) ++row[categories[v]];
        if (values.size() != items.front().size()) uniform = false;
        ratings.push_back(std::move(row));
      }
      if (uniform) field["fleiss"] = kappa_json(evaluation::fleiss_kappa(ratings));
    }

    // Cohen per annotator pair over the tasks both coded.
    std::set<std::string> annotators;
    for (const auto& task : completed) {
      for (const auto& r : task) annotators.insert(r.annotator_id);
    }
    Json pairs = Json::array();
    for (auto a = annotators.begin(); a != annotators.end(); ++a) {
      for (auto b = std::next(a); b != annotators.end(); ++b) {
        std::vector<std::string> va, vb;
        for (const auto& task : completed) {
          std::optional<std::string> x, y;
          for (const auto& r : task) {
            if (r.annotator_id == *a) x = extract(r);
            if (r.annotator_id == *b) y = extract(r);
          }
          if (x && y) {
            va.push_back(*x);
            vb.push_back(*y);
          }
        }
        if (va.empty()) continue;
        Json p = kappa_json(evaluation::cohen_kappa(std::span<const std::string>(va),
                                                    std::span<const std::string>(vb)));
        p["a"] = *a;
        p["b"] = *b;
        p["items"] = va.size();
        pairs.push_back(std::move(p));
      }
    }
    field["cohen"] = pairs;
    by_field[name] = field;
  }
  out["fields"] = by_field;
  return out;
}

// ---------------------------------------------------------------------------

TaskBoard::TaskBoard(providers::Manifest manifest, std::vector<providers::ManipulationRegion> regions,
                     std::vector<providers::FaceSidecar> faces, std::unique_ptr<Journal> journal,
                     BoardConfig config)
    : manifest_(std::move(manifest)), journal_(std::move(journal)), config_(config) {
  if (config_.n_annotators < 1) throw Error(ErrorCode::kConfigError, "n_annotators must be >= 1");
  for (const auto& r : regions) {
    const std::string id = r.image_id + ":" + r.region_id;
    if (!defs_.emplace(id, TaskDef{r.image_id, r.region_id, r.region, r.region_type}).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate task '" + id + "'");
    }
  }
  faces_ = providers::faces_by_image(faces);
  std::map<std::pair<std::string, std::string>, std::string> links;
  for (const auto& sc : faces) {
    for (const auto& [face, region] : sc.region_of_face) links[{sc.image_id, face}] = region;
  }
  for (const auto& [image_id, list] : faces_) {
    for (const auto& f : list) {
      auto& tasks = tasks_of_face_[{image_id, f.face_id}];
      if (auto l = links.find({image_id, f.face_id}); l != links.end()) {
        const std::string id = image_id + ":" + l->second;
        if (defs_.count(id)) tasks.push_back(id);
        continue;
      }
      for (const auto& [id, def] : defs_) {
        if (def.image_id == image_id && iou(def.region, f.box) >= config_.iou_threshold) {
          tasks.push_back(id);
        }
      }
    }
  }
  state_ = std::make_shared<const Journal::State>(journal_->open());
}

TaskBoard::Snapshot TaskBoard::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return state_;
}

const TaskBoard::TaskDef& TaskBoard::require_task(const std::string& task_id) const {
  const auto it = defs_.find(task_id);
  if (it == defs_.end()) {
    throw Error(ErrorCode::kDanglingReference, "unknown task '" + task_id + "'");
  }
  return it->second;
}

ReviewTask TaskBoard::describe(const std::string& task_id, const TaskDef& def,
                               const Journal::State& s) const {
  ReviewTask t;
  t.task_id = task_id;
  t.image_id = def.image_id;
  t.region_id = def.region_id;
  t.region = def.region;
  t.region_type = def.region_type;
  const auto records = s.annotations.records_for(task_id);
  for (const auto& r : records) t.annotator_ids.push_back(r.annotator_id);
  if (records.empty()) {
    t.status = TaskStatus::kPending;
  } else if (records.size() < config_.n_annotators) {
    t.status = TaskStatus::kPartiallyCoded;
  } else {
    t.status = audit::consensus(records, config_.n_annotators).needs_review()
                   ? TaskStatus::kEscalated
                   : TaskStatus::kResolved;
  }
  if (auto h = s.hints.find(task_id); h != s.hints.end()) {
    for (const auto& [face, hint] : h->second) t.hints.push_back(hint);
  }
  return t;
}

std::vector<ReviewTask> TaskBoard::tasks(std::optional<TaskStatus> filter) const {
  const Snapshot s = snapshot();
  std::vector<ReviewTask> out;
  for (const auto& [id, def] : defs_) {
    ReviewTask t = describe(id, def, *s);
    if (!filter || t.status == *filter) out.push_back(std::move(t));
  }
  return out;
}

std::optional<ReviewTask> TaskBoard::task(const std::string& task_id) const {
  const auto it = defs_.find(task_id);
  if (it == defs_.end()) return std::nullopt;
  return describe(task_id, it->second, *snapshot());
}

ReviewTask TaskBoard::submit(const std::string& task_id, AnnotationRecord record) {
  const TaskDef& def = require_task(task_id);
  if (record.image_id.empty()) record.image_id = def.image_id;
  if (record.region_id.empty()) record.region_id = def.region_id;
  std::string bad;
  if (record.image_id != def.image_id) bad += " image_id";
  if (record.region_id != def.region_id) bad += " region_id";
  if (record.annotator_id.empty()) bad += " annotator_id";
  for (const auto& f : record.coding.violations()) bad += " " + f;
  if (!bad.empty()) {
    throw Error(ErrorCode::kValidationError, "record rejected, fields:" + bad);
  }
  Json line = audit::to_json(record);
  line["kind"] = "annotation";

  std::lock_guard writer(write_mutex_);
  journal_->append(line);
  auto next = std::make_shared<Journal::State>(*snapshot());
  service::apply(*next, line);
  ++next->lines;
  {
    std::lock_guard lock(snapshot_mutex_);
    state_ = next;
  }
  return describe(task_id, def, *next);
}

ReviewTask TaskBoard::reopen(const std::string& task_id) {
  const TaskDef& def = require_task(task_id);
  std::lock_guard writer(write_mutex_);
  const Snapshot current = snapshot();
  if (describe(task_id, def, *current).status != TaskStatus::kEscalated) {
    throw Error(ErrorCode::kValidationError, "task '" + task_id + "' is not escalated");
  }
  const Json line{{"kind", "reopen"}, {"task_id", task_id}};
  journal_->append(line);
  auto next = std::make_shared<Journal::State>(*current);
  service::apply(*next, line);
  ++next->lines;
  {
    std::lock_guard lock(snapshot_mutex_);
    state_ = next;
  }
  return describe(task_id, def, *next);
}

std::size_t TaskBoard::import_predictions(
    const std::vector<std::pair<std::string, Hint>>& predictions) {
  Json hints = Json::array();
  std::set<std::string> touched;
  for (const auto& [image_id, hint] : predictions) {
    const auto it = tasks_of_face_.find({image_id, hint.face_id});
    if (it == tasks_of_face_.end()) {
      throw Error(ErrorCode::kDanglingReference,
                  "prediction for unknown face '" + hint.face_id + "' in image '" + image_id + "'");
    }
    for (const auto& task : it->second) {
      hints.push_back(Json{{"task_id", task},
                           {"face_id", hint.face_id},
                           {"label", std::string(classifier::to_string(hint.label))},
                           {"bystander_probability", hint.bystander_probability}});
      touched.insert(task);
    }
  }
  if (hints.empty()) return 0;
  const Json line{{"kind", "hints"}, {"hints", hints}};
  std::lock_guard writer(write_mutex_);
  journal_->append(line);
  auto next = std::make_shared<Journal::State>(*snapshot());
  service::apply(*next, line);
  ++next->lines;
  std::lock_guard lock(snapshot_mutex_);
  state_ = next;
  return touched.size();
}

std::vector<AnnotationRecord> TaskBoard::records(const std::string& task_id) const {
  require_task(task_id);
  return snapshot()->annotations.records_for(task_id);
}

std::optional<audit::ConsensusResult> TaskBoard::consensus(const std::string& task_id) const {
  const auto records = this->records(task_id);
  if (records.empty()) return std::nullopt;
  return audit::consensus(records, config_.n_annotators);
}

Json TaskBoard::agreement() const {
  const Snapshot s = snapshot();
  std::vector<std::vector<AnnotationRecord>> completed;
  for (const auto& [id, by_annotator] : s->annotations.tasks) {
    if (!defs_.count(id) || by_annotator.size() != config_.n_annotators) continue;
    completed.push_back(s->annotations.records_for(id));
  }
  return agreement_report(completed);
}

std::string TaskBoard::export_jsonl() const {
  const Snapshot s = snapshot();
  std::string out;
  for (const auto& [id, def] : defs_) {
    const auto records = s->annotations.records_for(id);
    if (records.empty()) continue;
    Json rs = Json::array();
    for (const auto& r : records) rs.push_back(audit::to_json(r));
    const ReviewTask t = describe(id, def, *s);
    Json line{{"task_id", id},
              {"image_id", def.image_id},
              {"region_id", def.region_id},
              {"status", std::string(to_string(t.status))},
              {"consensus", consensus_json(audit::consensus(records, config_.n_annotators))},
              {"records", rs}};
    out += line.dump() + "\n";
  }
  return out;
}

Json TaskBoard::overlay(const std::string& image_id) const {
  const auto& entry = manifest_.at(image_id);
  Json regions = Json::array();
  for (const auto& [id, def] : defs_) {
    if (def.image_id != image_id) continue;
    regions.push_back(Json{{"task_id", id},
                           {"region_id", def.region_id},
                           {"box", box_json(def.region)},
                           {"region_type", def.region_type}});
  }
  Json faces = Json::array();
  if (auto it = faces_.find(image_id); it != faces_.end()) {
    for (const auto& f : it->second) {
      faces.push_back(Json{{"face_id", f.face_id}, {"box", box_json(f.box)}, {"detected", f.detected}});
    }
  }
  return Json{{"image_id", image_id},
              {"width", entry.width},
              {"height", entry.height},
              {"regions", regions},
              {"faces", faces}};
}

void TaskBoard::compact() {
  std::lock_guard writer(write_mutex_);
  journal_->compact(*snapshot());
}

}  // namespace facegate::service
