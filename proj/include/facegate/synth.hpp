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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "facegate/classifier.hpp"
#include "facegate/dataset.hpp"
#include "facegate/features.hpp"
#include "facegate/imaging.hpp"

// Seeded synthetic corpus: rendered grayscale photos with subject and
// bystander faces, written in the same file formats the real pipeline reads.
//
// Subjects are large, near-central, sharply textured and near-frontal.
// Bystanders are small, placed anywhere, blurred, low-contrast and turned
// away (|yaw| in [25, 80]). With separable = false the size and texture
// ranges of the two classes overlap.
namespace facegate::evaluation {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_images = 200;
  bool separable = true;
  int width = 192;
  int height = 144;
};

struct SynthFace {
  features::FaceObservation face;
  classifier::Label label = classifier::Label::kSubject;
  features::HandcraftedFeatures features;
  features::Embedding embedding;
};

struct SynthImage {
  std::string image_id;
  std::string uploader_id;
  imaging::GrayImage pixels{1, 1, 0};
  std::vector<SynthFace> faces;
};

struct SyntheticCorpus {
  SynthConfig config;
  std::vector<SynthImage> images;

  std::vector<dataset::FaceRecord> records() const;  // labelled, with embeddings
  std::size_t face_count() const;
};

// Throws kConfigError for n_images == 0 or an image smaller than 64x48.
SyntheticCorpus generate_synthetic_dataset(const SynthConfig& config);

// Writes images/<id>.png, manifest.jsonl, faces.jsonl, embeddings.jsonl,
// labels.jsonl and features.jsonl into dir (created if needed).
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

// Best single handcrafted dimension for a threshold rule. margin is the gap
// between the closest opposite-class values (negative when they overlap).
struct MarginReport {
  std::size_t dimension = 0;
  double threshold = 0.0;
  double margin = 0.0;
  bool separable() const { return margin > 0.0; }
};

MarginReport margin_check(const SyntheticCorpus& corpus);

}  // namespace facegate::evaluation
