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

#include "facegate/dataset.hpp"

#include <cmath>
#include <fstream>

#include "facegate/error.hpp"
#include "facegate/jsonl.hpp"

namespace facegate::dataset {

using jsonl::Json;

namespace {

template <std::size_t N>
void read_array(const Json& v, std::array<double, N>& out, const char* field,
                const std::string& where) {
  if (!v.is_array() || v.size() != N) {
    throw Error(ErrorCode::kFormatError, where + ": field '" + field + "' must be an array of " +
                                             std::to_string(N) + " numbers");
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
      throw Error(ErrorCode::kFormatError,
                  where + ": field '" + field + "' holds a non-finite or non-numeric value");
    }
    out[i] = v[i].get<double>();
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::vector<FaceRecord> parse_feature_records(std::istream& in, const std::string& source) {
  std::vector<FaceRecord> out;
  jsonl::for_each_record(in, source, kFeaturesSchema, 1, [&](const Json& r, std::size_t line) {
    const std::string where = jsonl::location(source, line);
    FaceRecord rec;
    rec.image_id = jsonl::require_string(r, "image_id", where);
    rec.face_id = jsonl::require_string(r, "face_id", where);
    read_array(jsonl::require(r, "handcrafted", where), rec.handcrafted.values, "handcrafted",
               where);
    if (auto it = r.find("embedding"); it != r.end() && !it->is_null()) {
      features::Embedding e;
      read_array(*it, e.values, "embedding", where);
      e.source = features::EmbeddingSource::kSidecar;
      rec.embedding = e;
    }
    if (auto it = r.find("label"); it != r.end() && !it->is_null()) {
      if (!it->is_string()) throw Error(ErrorCode::kFormatError, where + ": label must be a string");
      rec.label = classifier::parse_label(it->get<std::string>());
    }
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<FaceRecord> load_feature_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_feature_records(in, path.string());
}

void write_feature_records(std::ostream& out, const std::vector<FaceRecord>& records) {
  out << jsonl::header(kFeaturesSchema, 1).dump() << '\n';
  for (const auto& rec : records) {
    Json j;
    j["image_id"] = rec.image_id;
    j["face_id"] = rec.face_id;
    j["handcrafted"] = rec.handcrafted.values;
    if (rec.embedding) j["embedding"] = rec.embedding->values;
    if (rec.label) j["label"] = std::string(classifier::to_string(*rec.label));
    out << j.dump() << '\n';
  }
}

void write_feature_records(const std::filesystem::path& path,
                           const std::vector<FaceRecord>& records) {
  auto out = open_out(path);
  write_feature_records(out, records);
}

LabelTable parse_labels(std::istream& in, const std::string& source) {
  LabelTable table;
  jsonl::for_each_record(in, source, kLabelsSchema, 1, [&](const Json& r, std::size_t line) {
    const std::string where = jsonl::location(source, line);
    LabelKey key{jsonl::require_string(r, "image_id", where),
                 jsonl::require_string(r, "face_id", where)};
    const Label label = classifier::parse_label(jsonl::require_string(r, "label", where));
    if (!table.emplace(key, label).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate label for face '" + key.second + "'");
    }
  });
  return table;
}

LabelTable load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return parse_labels(in, path.string());
}

void write_labels(const std::filesystem::path& path, const LabelTable& labels) {
  auto out = open_out(path);
  out << jsonl::header(kLabelsSchema, 1).dump() << '\n';
  for (const auto& [key, label] : labels) {
    Json j;
    j["image_id"] = key.first;
    j["face_id"] = key.second;
    j["label"] = std::string(classifier::to_string(label));
    out << j.dump() << '\n';
  }
}

void attach_labels(std::vector<FaceRecord>& records, const LabelTable& labels) {
  for (auto& rec : records) {
    const auto it = labels.find({rec.image_id, rec.face_id});
    if (it == labels.end()) {
      throw Error(ErrorCode::kValidationError, "no label for face '" + rec.face_id + "' in image '" +
                                                   rec.image_id + "'");
    }
    rec.label = it->second;
  }
}

std::vector<LabeledExample> to_examples(const std::vector<FaceRecord>& records, FeatureMask mask) {
  std::vector<LabeledExample> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.label) {
      throw Error(ErrorCode::kValidationError, "face '" + rec.face_id + "' carries no label");
    }
    LabeledExample ex;
    ex.features = features::assemble_feature_vector(rec.handcrafted, rec.embedding, mask);
    ex.label = *rec.label;
    ex.face_id = rec.face_id;
    ex.image_id = rec.image_id;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::string> image_ids_of(const std::vector<LabeledExample>& examples) {
  std::vector<std::string> ids;
  ids.reserve(examples.size());
  for (const auto& ex : examples) ids.push_back(ex.image_id);
  return ids;
}

}  // namespace facegate::dataset
