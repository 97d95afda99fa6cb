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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "facegate/classifier.hpp"
#include "facegate/dataset.hpp"
#include "facegate/features.hpp"
#include "facegate/providers.hpp"

namespace facegate::audit {

using classifier::Label;
using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Coding scheme

enum class FaceVerification { kContainsFace, kNoFace };
enum class ManipulationVerification { kManipulated, kNotManipulated };
enum class Intention { kPrivacy, kHumor, kBeauty, kInformation, kUnknown };
enum class Part { kWholeBody, kWholeFace, kEye, kNose, kMouth, kEar, kOthers };
enum class Method { kBlur, kPixel, kMask, kDistort };

std::string_view to_string(FaceVerification v);
std::string_view to_string(ManipulationVerification v);
std::string_view to_string(Intention v);
std::string_view to_string(Part v);
std::string_view to_string(Method v);

struct ManipulationCoding {
  FaceVerification face_verification = FaceVerification::kContainsFace;
  ManipulationVerification manipulation_verification = ManipulationVerification::kNotManipulated;
  std::set<Intention> intentions;
  std::set<Part> parts;
  std::set<Method> methods;

  bool manipulated() const {
    return manipulation_verification == ManipulationVerification::kManipulated;
  }
  // Names of the fields that break an invariant; empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;  // kValidationError naming the fields
  bool operator==(const ManipulationCoding&) const = default;
};

Json to_json(const ManipulationCoding& coding);
// Unknown enum values and wrong types are reported per field in errors
// (e.g. "coding.parts"); invariant violations are reported the same way.
std::optional<ManipulationCoding> coding_from_json(const Json& j, std::vector<std::string>& errors);

// One annotator's coding of one manipulation region.
struct AnnotationRecord {
  std::string image_id;
  std::string region_id;
  std::string annotator_id;
  ManipulationCoding coding;
  std::optional<Label> label;  // the annotator's subject/bystander judgement
  std::string timestamp;       // opaque, supplied by the client

  std::string task_id() const { return image_id + ":" + region_id; }
};

Json to_json(const AnnotationRecord& record);
std::optional<AnnotationRecord> record_from_json(const Json& j, std::vector<std::string>& errors);

// ---------------------------------------------------------------------------
// Classification rules

enum class FaceClass { kA, kB, kC };
enum class AnonymizationLevel { kNone, kPartial, kFull };
enum class PersonCategory { kUploader, kFriend, kBystanderStar };
enum class PrivacyClass { k1 = 1, k2 = 2, k3 = 3 };

std::string_view to_string(FaceClass v);
std::string_view to_string(AnonymizationLevel v);
std::string_view to_string(PersonCategory v);

// Throws kNotAFace for an undetected, unmanipulated region.
FaceClass face_class(bool detected_by_detector, bool manipulated);

// A -> None, C -> Full, B -> Partial when a key part (eye, nose, mouth, whole
// face, whole body) was manipulated and None otherwise. Throws
// kInconsistentCoding when the coding contradicts the class.
AnonymizationLevel anonymization_level(FaceClass cls, const ManipulationCoding& coding);

inline constexpr double kDefaultMatchThreshold = 0.6;

// max cosine similarity >= tau. An empty profile never matches.
bool match_uploader(const features::Embedding& face, std::span<const features::Embedding> profile,
                    double tau = kDefaultMatchThreshold);

// A profile match wins over the label.
PersonCategory categorize_person(Label label, bool uploader_match);

// nullopt for a non-anonymized uploader face (not a leakage case).
std::optional<PrivacyClass> privacy_class(PersonCategory category, AnonymizationLevel level);

// ---------------------------------------------------------------------------
// Consensus

struct ConsensusResult {
  ManipulationCoding coding;
  std::optional<Label> label;
  bool escalated = false;                    // intention fell back to {unknown}
  std::vector<std::string> unresolved;       // other fields needing re-review
  std::size_t records = 0;

  bool needs_review() const { return escalated || !unresolved.empty(); }
};

// Strict majority (> n/2, n = max(n_annotators, records)) per field; the set
// fields are decided as whole sets. The bystander label needs floor(n/2) + 1
// votes; otherwise any labelled record resolves to subject. Unresolved parts
// and methods keep the elements a strict majority chose. Throws kEmptyInput.
ConsensusResult consensus(std::span<const AnnotationRecord> records, std::size_t n_annotators);

// ---------------------------------------------------------------------------
// Annotation files

inline constexpr std::string_view kAnnotationsSchema = "facegate.annotations";

// Lines are {"kind": "annotation", ...record} (kind optional), {"kind":
// "reopen", "task_id"} or {"kind": "hints", ...}. Annotations replace the same
// annotator's earlier record for the task; reopen discards a task's records.
// Other kinds are skipped.
struct AnnotationSet {
  // task_id -> annotator_id -> record
  std::map<std::string, std::map<std::string, AnnotationRecord>> tasks;

  void upsert(AnnotationRecord record);
  void reopen(const std::string& task_id);
  std::vector<AnnotationRecord> records_for(const std::string& task_id) const;
  std::size_t size() const;
};

AnnotationSet load_annotations(const std::filesystem::path& path);
AnnotationSet parse_annotations(std::istream& in, std::string_view source);

// ---------------------------------------------------------------------------
// Aggregation

// bits: has a non-anonymized face, has a partial one, has a full one.
struct TripleCode {
  bool none = false;
  bool partial = false;
  bool full = false;

  bool any() const { return none || partial || full; }
  std::string str() const;  // "100", "011", ...
  TripleCode& operator|=(const TripleCode& o);
  bool operator==(const TripleCode&) const = default;
};

TripleCode encode_triple(std::span<const AnonymizationLevel> levels);

struct AuditFace {
  std::string face_id;
  std::optional<Label> label;
  std::optional<PersonCategory> category;
  std::optional<AnonymizationLevel> level;
  std::optional<ManipulationCoding> coding;  // consensus coding of a manipulated face
};

struct AuditImage {
  std::string image_id;
  std::string uploader_id;
  std::optional<bool> verified_account;
  std::optional<std::string> profile_type;
  bool celebrity_only = false;
  std::vector<AuditFace> faces;
};

using Counts = std::map<std::string, std::map<std::string, std::uint64_t>>;  // row -> col -> n

struct ChiSquareResult {
  std::string name;                       // e.g. "friend/account"
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::uint64_t>> table;
  std::optional<double> statistic;        // nullopt when fewer than 2 usable rows/cols
  int dof = 0;
  std::optional<double> p_value;
  bool yates = false;
};

// Pearson chi-square on an r x c contingency table. Rows and columns with a
// zero margin are dropped first. yates applies the continuity correction
// to 2 x 2 tables only.
ChiSquareResult chi_square(std::vector<std::vector<std::uint64_t>> table, bool yates = false);

struct AuditReport {
  std::size_t images = 0;              // images aggregated (celebrity images excluded)
  std::size_t celebrity_dropped = 0;
  std::size_t uploaders = 0;

  // Face counts by label and by category: Subject, Bystander, Friend,
  // Uploader, Bystander*.
  std::map<std::string, std::uint64_t> face_counts;
  // Image composition rows -> {"Image Level", "Uploader Level"}.
  Counts composition;
  // Anonymization level row -> category column.
  Counts face_levels;
  // Privacy class "1"/"2"/"3" -> count.
  std::map<std::string, std::uint64_t> privacy_classes;
  // "(100,-)" style rows -> presence-group columns.
  Counts image_codes;
  Counts uploader_codes;
  // Per category ("Friend", "Bystander*", "Uploader"): intention label -> level.
  std::map<std::string, Counts> intentions;
  // Part / method combination -> "<Category> <Level>" columns.
  Counts parts;
  Counts methods;
  std::vector<ChiSquareResult> chi_square;

  // Margins used by the conservation check.
  std::map<std::string, std::uint64_t> manipulated_faces;  // category -> coded faces
  std::uint64_t privacy_anonymized_faces = 0;  // rows of the part/method tables
};

// Commutative, associative fold over images. Throws kIncompleteFace when a
// face lacks a label, category or level.
class AuditAccumulator {
 public:
  void add(const AuditImage& image);
  void merge(const AuditAccumulator& other);
  AuditReport report(bool yates = false) const;

 private:
  struct Presence {
    bool friend_ = false, uploader = false, bystander_star = false;
    bool subject = false, bystander = false;
    TripleCode friend_code, bystander_code;
    void merge(const Presence& o);
  };
  struct UploaderState {
    Presence presence;
    std::optional<bool> verified_account;
    std::optional<std::string> profile_type;
  };

  std::size_t images_ = 0;
  std::size_t celebrity_dropped_ = 0;
  std::map<std::string, std::uint64_t> face_counts_;
  std::map<std::string, std::uint64_t> image_composition_;
  Counts face_levels_;
  std::map<std::string, std::uint64_t> privacy_classes_;
  Counts image_codes_;
  std::map<std::string, Counts> intentions_;
  Counts parts_;
  Counts methods_;
  std::map<std::string, std::uint64_t> manipulated_faces_;
  std::uint64_t privacy_anonymized_faces_ = 0;
  std::map<std::string, UploaderState> uploaders_;
};

// Every face-level table total equals the matching face count and every image
// table sums to the image count. Returns the violated identities.
std::vector<std::string> conservation_violations(const AuditReport& report);

// Label strings used for table rows.
std::string intention_label(const std::set<Intention>& intentions);
std::string parts_label(const std::set<Part>& parts);
std::string methods_label(const std::set<Method>& methods);

// ---------------------------------------------------------------------------
// Corpus pipeline

struct PipelineConfig {
  std::size_t n_annotators = 3;
  double tau = kDefaultMatchThreshold;
  double iou_threshold = 0.5;  // face-to-region fallback when no region_id is given
};

struct PipelineInputs {
  providers::Manifest manifest;
  std::vector<providers::FaceSidecar> sidecars;
  std::vector<providers::ManipulationRegion> regions;
  AnnotationSet annotations;
  dataset::LabelTable labels;
  providers::EmbeddingTable embeddings;
  providers::ProfileTable profiles;
};

struct PipelineResult {
  std::vector<AuditImage> images;
  std::vector<std::string> warnings;
  std::size_t excluded_images = 0;  // pending or unresolved annotation tasks
};

// Resolves every face: class from detector flag and region consensus, level,
// label (annotator consensus over the labels table), uploader match, category.
PipelineResult build_audit_images(const PipelineInputs& inputs, const PipelineConfig& config);

// Face-level audit stream ("facegate.audit_faces"): one AuditImage per line.
inline constexpr const char* kAuditFacesSchema = "facegate.audit_faces";
Json to_json(const AuditImage& image);
AuditImage audit_image_from_json(const Json& j, std::string_view where);  // kFormatError
void write_audit_images(const std::filesystem::path& path, const std::vector<AuditImage>& images);
std::vector<AuditImage> load_audit_images(const std::filesystem::path& path);

Json to_json(const AuditReport& report);
// report.json, one CSV per table and summary.txt.
void export_report(const AuditReport& report, const std::filesystem::path& dir);
std::string summary_text(const AuditReport& report);

}  // namespace facegate::audit
