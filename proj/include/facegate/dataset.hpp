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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "facegate/classifier.hpp"
#include "facegate/features.hpp"

// Per-face feature records ("facegate.features") and ground-truth labels
// ("facegate.labels"), both line-delimited JSON.
namespace facegate::dataset {

using classifier::Label;
using classifier::LabeledExample;
using features::Embedding;
using features::FeatureMask;
using features::HandcraftedFeatures;

inline constexpr const char* kFeaturesSchema = "facegate.features";
inline constexpr const char* kLabelsSchema = "facegate.labels";

struct FaceRecord {
  std::string image_id;
  std::string face_id;
  HandcraftedFeatures handcrafted;
  std::optional<Embedding> embedding;
  std::optional<Label> label;
};

// {"image_id","face_id","handcrafted":[20],"embedding":[512]?,"label":"..."?}
std::vector<FaceRecord> parse_feature_records(std::istream& in, const std::string& source);
std::vector<FaceRecord> load_feature_records(const std::filesystem::path& path);
void write_feature_records(std::ostream& out, const std::vector<FaceRecord>& records);
void write_feature_records(const std::filesystem::path& path, const std::vector<FaceRecord>& records);

using LabelKey = std::pair<std::string, std::string>;  // (image_id, face_id)
using LabelTable = std::map<LabelKey, Label>;

// {"image_id","face_id","label"}; duplicates raise kDuplicateId.
LabelTable load_labels(const std::filesystem::path& path);
LabelTable parse_labels(std::istream& in, const std::string& source);
void write_labels(const std::filesystem::path& path, const LabelTable& labels);

// Copies labels onto records; records without a label raise kValidationError.
void attach_labels(std::vector<FaceRecord>& records, const LabelTable& labels);

// Every record must carry a label (kValidationError) and, for masks that use
// it, an embedding (kMissingEmbedding).
std::vector<LabeledExample> to_examples(const std::vector<FaceRecord>& records, FeatureMask mask);

std::vector<std::string> image_ids_of(const std::vector<LabeledExample>& examples);

}  // namespace facegate::dataset
