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
#include <fstream>
#include <map>

#include "facegate/audit.hpp"
#include "facegate/error.hpp"
#include "facegate/jsonl.hpp"

namespace facegate::audit {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view text, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (name == text) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(E value, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

constexpr std::array<std::pair<FaceVerification, std::string_view>, 2> kFaceVerification{{
    {FaceVerification::kContainsFace, "contains_face"},
    {FaceVerification::kNoFace, "no_face"},
}};
constexpr std::array<std::pair<ManipulationVerification, std::string_view>, 2> kManipulation{{
    {ManipulationVerification::kManipulated, "manipulated"},
    {ManipulationVerification::kNotManipulated, "not_manipulated"},
}};
constexpr std::array<std::pair<Intention, std::string_view>, 5> kIntentions{{
    {Intention::kPrivacy, "privacy"},
    {Intention::kHumor, "humor"},
    {Intention::kBeauty, "beauty"},
    {Intention::kInformation, "information"},
    {Intention::kUnknown, "unknown"},
}};
constexpr std::array<std::pair<Part, std::string_view>, 7> kParts{{
    {Part::kWholeBody, "whole_body"},
    {Part::kWholeFace, "whole_face"},
    {Part::kEye, "eye"},
    {Part::kNose, "nose"},
    {Part::kMouth, "mouth"},
    {Part::kEar, "ear"},
    {Part::kOthers, "others"},
}};
constexpr std::array<std::pair<Method, std::string_view>, 4> kMethods{{
    {Method::kBlur, "blur"},
    {Method::kPixel, "pixel"},
    {Method::kMask, "mask"},
    {Method::kDistort, "distort"},
}};

template <typename E, std::size_t N>
std::optional<E> read_enum(const Json& j, const char* field, const std::string& prefix,
                           const std::array<std::pair<E, std::string_view>, N>& table,
                           std::vector<std::string>& errors) {
  const auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    errors.push_back(prefix + field);
    return std::nullopt;
  }
  auto v = lookup(it->get<std::string>(), table);
  if (!v) errors.push_back(prefix + field);
  return v;
}

template <typename E, std::size_t N>
std::optional<std::set<E>> read_set(const Json& j, const char* field, const std::string& prefix,
                                    const std::array<std::pair<E, std::string_view>, N>& table,
                                    std::vector<std::string>& errors, bool required) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    if (required) {
      errors.push_back(prefix + field);
      return std::nullopt;
    }
    return std::set<E>{};
  }
  if (!it->is_array()) {
    errors.push_back(prefix + field);
    return std::nullopt;
  }
  std::set<E> out;
  for (const auto& x : *it) {
    std::optional<E> v;
    if (x.is_string()) v = lookup(x.get<std::string>(), table);
    if (!v) {
      errors.push_back(prefix + field);
      return std::nullopt;
    }
    out.insert(*v);
  }
  return out;
}

template <typename E, std::size_t N>
Json names(const std::set<E>& values, const std::array<std::pair<E, std::string_view>, N>& table) {
  Json a = Json::array();
  for (E v : values) a.push_back(std::string(name_of(v, table)));
  return a;
}

// Value with the most votes; ties go to the smallest key.
template <typename K>
std::pair<K, std::size_t> plurality(const std::map<K, std::size_t>& votes) {
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return *best;
}

template <typename E>
std::set<E> elementwise_majority(std::span<const AnnotationRecord> records, std::size_t need,
                                 std::set<E> ManipulationCoding::*field) {
  std::map<E, std::size_t> votes;
  for (const auto& r : records) {
    for (E e : r.coding.*field) ++votes[e];
  }
  std::set<E> out;
  for (const auto& [e, n] : votes) {
    if (n >= need) out.insert(e);
  }
  return out;
}

}  // namespace

std::string_view to_string(FaceVerification v) { return name_of(v, kFaceVerification); }
std::string_view to_string(ManipulationVerification v) { return name_of(v, kManipulation); }
std::string_view to_string(Intention v) { return name_of(v, kIntentions); }
std::string_view to_string(Part v) { return name_of(v, kParts); }
std::string_view to_string(Method v) { return name_of(v, kMethods); }

std::string_view to_string(FaceClass v) {
  switch (v) {
    case FaceClass::kA: return "A";
    case FaceClass::kB: return "B";
    case FaceClass::kC: return "C";
  }
  return "?";
}

std::string_view to_string(AnonymizationLevel v) {
  switch (v) {
    case AnonymizationLevel::kNone: return "none";
    case AnonymizationLevel::kPartial: return "partial";
    case AnonymizationLevel::kFull: return "full";
  }
  return "?";
}

std::string_view to_string(PersonCategory v) {
  switch (v) {
    case PersonCategory::kUploader: return "uploader";
    case PersonCategory::kFriend: return "friend";
    case PersonCategory::kBystanderStar: return "bystander*";
  }
  return "?";
}

// ---------------------------------------------------------------------------

std::vector<std::string> ManipulationCoding::violations() const {
  std::vector<std::string> out;
  if (intentions.empty() || (intentions.count(Intention::kUnknown) && intentions.size() > 1)) {
    out.push_back("coding.intentions");
  }
  if (!manipulated()) {
    if (!parts.empty()) out.push_back("coding.parts");
    if (!methods.empty()) out.push_back("coding.methods");
  }
  return out;
}

void ManipulationCoding::validate() const {
  const auto bad = violations();
  if (bad.empty()) return;
  std::string msg = "invalid coding:";
  for (const auto& f : bad) msg += " " + f;
  throw Error(ErrorCode::kValidationError, msg);
}

Json to_json(const ManipulationCoding& c) {
  return Json{{"face_verification", std::string(to_string(c.face_verification))},
              {"manipulation_verification", std::string(to_string(c.manipulation_verification))},
              {"intentions", names(c.intentions, kIntentions)},
              {"parts", names(c.parts, kParts)},
              {"methods", names(c.methods, kMethods)}};
}

std::optional<ManipulationCoding> coding_from_json(const Json& j, std::vector<std::string>& errors) {
  const std::size_t before = errors.size();
  if (!j.is_object()) {
    errors.push_back("coding");
    return std::nullopt;
  }
  const std::string p = "coding.";
  auto fv = read_enum(j, "face_verification", p, kFaceVerification, errors);
  auto mv = read_enum(j, "manipulation_verification", p, kManipulation, errors);
  auto in = read_set(j, "intentions", p, kIntentions, errors, true);
  auto pa = read_set(j, "parts", p, kParts, errors, false);
  auto me = read_set(j, "methods", p, kMethods, errors, false);
  if (errors.size() != before) return std::nullopt;
  ManipulationCoding c{*fv, *mv, *in, *pa, *me};
  const auto bad = c.violations();
  if (!bad.empty()) {
    errors.insert(errors.end(), bad.begin(), bad.end());
    return std::nullopt;
  }
  return c;
}

Json to_json(const AnnotationRecord& r) {
  Json j{{"image_id", r.image_id},
         {"region_id", r.region_id},
         {"annotator_id", r.annotator_id},
         {"coding", to_json(r.coding)},
         {"timestamp", r.timestamp}};
  if (r.label) j["label"] = std::string(classifier::to_string(*r.label));
  return j;
}

std::optional<AnnotationRecord> record_from_json(const Json& j, std::vector<std::string>& errors) {
  if (!j.is_object()) {
    errors.push_back("record");
    return std::nullopt;
  }
  const std::size_t before = errors.size();
  AnnotationRecord r;
  auto text = [&](const char* field, std::string& out, bool required) {
    const auto it = j.find(field);
    if (it == j.end() || it->is_null()) {
      if (required) errors.push_back(field);
      return;
    }
    if (!it->is_string() || (required && it->get<std::string>().empty())) {
      errors.push_back(field);
      return;
    }
    out = it->get<std::string>();
  };
  text("image_id", r.image_id, true);
  text("region_id", r.region_id, true);
  text("annotator_id", r.annotator_id, true);
  text("timestamp", r.timestamp, false);
  if (const auto it = j.find("coding"); it == j.end()) {
    errors.push_back("coding");
  } else if (auto c = coding_from_json(*it, errors)) {
    r.coding = *c;
  }
  if (const auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (it->is_string() && (*it == "subject" || *it == "bystander")) {
      r.label = classifier::parse_label(it->get<std::string>());
    } else {
      errors.push_back("label");
    }
  }
  if (errors.size() != before) return std::nullopt;
  return r;
}

// ---------------------------------------------------------------------------

FaceClass face_class(bool detected_by_detector, bool manipulated) {
  if (detected_by_detector) return manipulated ? FaceClass::kB : FaceClass::kA;
  if (manipulated) return FaceClass::kC;
  throw Error(ErrorCode::kNotAFace, "undetected and unmanipulated region carries no face");
}

AnonymizationLevel anonymization_level(FaceClass cls, const ManipulationCoding& coding) {
  switch (cls) {
    case FaceClass::kA:
      if (coding.manipulated()) {
        throw Error(ErrorCode::kInconsistentCoding, "class A face has a manipulated coding");
      }
      return AnonymizationLevel::kNone;
    case FaceClass::kB: {
      if (!coding.manipulated()) {
        throw Error(ErrorCode::kInconsistentCoding, "class B face has an unmanipulated coding");
      }
      static constexpr Part kKeyParts[] = {Part::kEye, Part::kNose, Part::kMouth, Part::kWholeFace,
                                           Part::kWholeBody};
      for (Part p : kKeyParts) {
        if (coding.parts.count(p)) return AnonymizationLevel::kPartial;
      }
      return AnonymizationLevel::kNone;
    }
    case FaceClass::kC:
      if (!coding.manipulated()) {
        throw Error(ErrorCode::kInconsistentCoding, "class C face has an unmanipulated coding");
      }
      return AnonymizationLevel::kFull;
  }
  return AnonymizationLevel::kNone;
}

bool match_uploader(const features::Embedding& face, std::span<const features::Embedding> profile,
                    double tau) {
  bool matched = false;
  for (const auto& p : profile) {
    if (providers::cosine_similarity(face, p) >= tau) matched = true;
  }
  return matched;
}

PersonCategory categorize_person(Label label, bool uploader_match) {
  if (uploader_match) return PersonCategory::kUploader;
  return label == Label::kSubject ? PersonCategory::kFriend : PersonCategory::kBystanderStar;
}

std::optional<PrivacyClass> privacy_class(PersonCategory category, AnonymizationLevel level) {
  switch (level) {
    case AnonymizationLevel::kNone:
      if (category == PersonCategory::kUploader) return std::nullopt;
      return PrivacyClass::k1;
    case AnonymizationLevel::kPartial: return PrivacyClass::k2;
    case AnonymizationLevel::kFull: return PrivacyClass::k3;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

ConsensusResult consensus(std::span<const AnnotationRecord> records, std::size_t n_annotators) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "consensus needs at least one record");
  const std::size_t n = std::max(n_annotators, records.size());
  const std::size_t need = n / 2 + 1;
  ConsensusResult out;
  out.records = records.size();

  std::map<FaceVerification, std::size_t> fv;
  std::map<ManipulationVerification, std::size_t> mv;
  std::map<std::set<Intention>, std::size_t> in;
  std::map<std::set<Part>, std::size_t> pa;
  std::map<std::set<Method>, std::size_t> me;
  std::size_t bystander_votes = 0, label_votes = 0;
  for (const auto& r : records) {
    ++fv[r.coding.face_verification];
    ++mv[r.coding.manipulation_verification];
    ++in[r.coding.intentions];
    ++pa[r.coding.parts];
    ++me[r.coding.methods];
    if (r.label) {
      ++label_votes;
      if (*r.label == Label::kBystander) ++bystander_votes;
    }
  }

  auto [fv_value, fv_votes] = plurality(fv);
  out.coding.face_verification = fv_value;
  if (fv_votes < need) out.unresolved.push_back("face_verification");

  auto [mv_value, mv_votes] = plurality(mv);
  out.coding.manipulation_verification = mv_value;
  if (mv_votes < need) out.unresolved.push_back("manipulation_verification");

  auto [in_value, in_votes] = plurality(in);
  if (in_votes >= need) {
    out.coding.intentions = in_value;
  } else {
    out.coding.intentions = {Intention::kUnknown};
    out.escalated = true;
  }

  if (out.coding.manipulated()) {
    auto [pa_value, pa_votes] = plurality(pa);
    if (pa_votes >= need) {
      out.coding.parts = pa_value;
    } else {
      out.coding.parts = elementwise_majority(records, need, &ManipulationCoding::parts);
      out.unresolved.push_back("parts");
    }
    auto [me_value, me_votes] = plurality(me);
    if (me_votes >= need) {
      out.coding.methods = me_value;
    } else {
      out.coding.methods = elementwise_majority(records, need, &ManipulationCoding::methods);
      out.unresolved.push_back("methods");
    }
  }

  if (bystander_votes >= need) {
    out.label = Label::kBystander;
  } else if (label_votes > 0) {
    out.label = Label::kSubject;
  }
  return out;
}

// ---------------------------------------------------------------------------

void AnnotationSet::upsert(AnnotationRecord record) {
  auto& slot = tasks[record.task_id()];
  const std::string annotator = record.annotator_id;
  slot.insert_or_assign(annotator, std::move(record));
}

void AnnotationSet::reopen(const std::string& task_id) { tasks.erase(task_id); }

std::vector<AnnotationRecord> AnnotationSet::records_for(const std::string& task_id) const {
  std::vector<AnnotationRecord> out;
  if (const auto it = tasks.find(task_id); it != tasks.end()) {
    for (const auto& [annotator, r] : it->second) out.push_back(r);
  }
  return out;
}

std::size_t AnnotationSet::size() const {
  std::size_t n = 0;
  for (const auto& [id, by_annotator] : tasks) n += by_annotator.size();
  return n;
}

AnnotationSet parse_annotations(std::istream& in, std::string_view source) {
  AnnotationSet set;
  jsonl::for_each_record(in, source, kAnnotationsSchema, 1, [&](const Json& j, std::size_t line) {
    const std::string where = jsonl::location(source, line);
    const std::string kind = j.value("kind", std::string("annotation"));
    if (kind == "reopen") {
      set.reopen(jsonl::require_string(j, "task_id", where));
      return;
    }
    if (kind != "annotation") return;
    std::vector<std::string> errors;
    auto r = record_from_json(j, errors);
    if (!r) {
      std::string msg = where + ": invalid annotation record, fields:";
      for (const auto& e : errors) msg += " " + e;
      throw Error(ErrorCode::kFormatError, msg);
    }
    set.upsert(std::move(*r));
  });
  return set;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_annotations(in, path.string());
}

}  // namespace facegate::audit
