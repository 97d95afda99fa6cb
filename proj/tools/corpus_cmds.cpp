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

// synth, features extract
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>

#include <omp.h>

#include "cli_common.hpp"
#include "facegate/dataset.hpp"
#include "facegate/features.hpp"
#include "facegate/image_io.hpp"
#include "facegate/providers.hpp"
#include "facegate/seed.hpp"
#include "facegate/synth.hpp"

namespace facegate::cli {

namespace {

struct SynthOptions {
  std::size_t images = 200;
  bool non_separable = false;
  int width = 192;
  int height = 144;
  std::string out;
};

void run_synth(const SynthOptions& o, const Context& ctx) {
  evaluation::SynthConfig cfg;
  cfg.seed = ctx.seed;
  cfg.n_images = o.images;
  cfg.separable = !o.non_separable;
  cfg.width = o.width;
  cfg.height = o.height;
  const auto corpus = evaluation::generate_synthetic_dataset(cfg);
  evaluation::write_corpus(corpus, o.out);
  const auto margin = evaluation::margin_check(corpus);
  const Json summary{{"images", corpus.images.size()},
                     {"faces", corpus.face_count()},
                     {"margin", {{"dimension", margin.dimension},
                                 {"threshold", margin.threshold},
                                 {"margin", margin.margin},
                                 {"separable", margin.separable()}}}};
  write_file(fs::path(o.out) / "synth.json", summary.dump(2) + "\n");
  write_stamp(o.out, ctx);
  std::cout << summary.dump() << '\n';
}

struct ExtractOptions {
  std::string manifest;
  std::string faces;
  std::string detector;
  double detector_threshold = 0.5;
  std::string pose_model;
  std::string embedder = "auto";
  std::string embeddings;
  std::string embed_model;
  std::string labels;
  std::string out;
};

void run_extract(const ExtractOptions& o, const Context& ctx) {
  using providers::FaceObservation;
  const providers::Manifest manifest = providers::load_manifest(o.manifest);

  std::vector<providers::FaceSidecar> sidecars;
  std::unique_ptr<providers::OnnxFaceDetector> detector;
  if (!o.faces.empty()) {
    sidecars = providers::load_face_sidecar(o.faces, manifest);
  } else if (!o.detector.empty()) {
    require_file(o.detector, "--detector");
    detector = std::make_unique<providers::OnnxFaceDetector>(o.detector, o.detector_threshold);
  } else {
    throw Error(ErrorCode::kConfigError, "either --faces or a detector model is required");
  }

  std::shared_ptr<const providers::PoseModel> pose_model;
  if (!o.pose_model.empty()) {
    require_file(o.pose_model, "--pose-model");
    pose_model = std::make_shared<providers::OnnxPoseModel>(o.pose_model);
  }
  const providers::PoseResolver poses(pose_model);

  std::string embedder = o.embedder;
  if (embedder == "auto") {
    embedder = !o.embeddings.empty() ? "sidecar" : !o.embed_model.empty() ? "onnx" : "none";
  }
  std::unique_ptr<providers::EmbeddingProvider> embed;
  if (embedder == "stub") {
    embed = std::make_unique<providers::StubEmbeddingProvider>(derive_seed(ctx.seed, "embed"));
  } else if (embedder == "sidecar") {
    if (o.embeddings.empty()) throw Error(ErrorCode::kConfigError, "--embeddings is required");
    embed = std::make_unique<providers::SidecarEmbeddingProvider>(
        providers::load_embedding_sidecar(o.embeddings));
  } else if (embedder == "onnx") {
    if (o.embed_model.empty()) throw Error(ErrorCode::kConfigError, "--embed-model is required");
    require_file(o.embed_model, "--embed-model");
    embed = std::make_unique<providers::OnnxEmbeddingProvider>(o.embed_model);
  }
  const bool need_rgb = detector || pose_model || embedder == "onnx";

  std::map<std::string, std::vector<FaceObservation>> faces = providers::faces_by_image(sidecars);
  const auto& entries = manifest.entries();
  const std::size_t n = entries.size();

  struct ImageResult {
    std::vector<dataset::FaceRecord> records;
    std::vector<FaceObservation> detected;
    std::vector<std::string> warnings;
    std::exception_ptr error;
  };
  std::vector<ImageResult> results(n);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    ImageResult& r = results[i];
    try {
      const auto& entry = entries[i];
      const auto path = manifest.resolve(entry);
      std::optional<imaging::RgbImage> rgb;
      if (need_rgb) rgb = imaging::read_rgb(path);
      const imaging::GrayImage gray = rgb ? imaging::to_grayscale(*rgb) : imaging::read_gray(path);

      std::vector<FaceObservation> list;
      if (detector) {
        list = detector->detect(*rgb, entry.image_id);
        r.detected = list;
      } else if (auto it = faces.find(entry.image_id); it != faces.end()) {
        list = it->second;
      }
      if (list.empty()) continue;
      for (auto& f : list) {
        const providers::FaceContext fc{entry.image_id, f, rgb ? &*rgb : nullptr};
        auto resolved = poses.resolve(fc);
        if (resolved.warning) r.warnings.push_back(*resolved.warning);
        f.pose = resolved.pose;
      }
      const auto hand = features::extract_all(gray, list);
      for (std::size_t k = 0; k < list.size(); ++k) {
        dataset::FaceRecord rec;
        rec.image_id = entry.image_id;
        rec.face_id = list[k].face_id;
        rec.handcrafted = hand[k];
        if (embed) {
          rec.embedding = embed->embed(providers::FaceContext{entry.image_id, list[k],
                                                              rgb ? &*rgb : nullptr});
        }
        r.records.push_back(std::move(rec));
      }
    } catch (...) {
      r.error = std::current_exception();
    }
  }

  std::vector<dataset::FaceRecord> records;
  std::vector<providers::FaceSidecar> detected;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i].error) std::rethrow_exception(results[i].error);
    for (const auto& w : results[i].warnings) warn(w);
    for (auto& rec : results[i].records) records.push_back(std::move(rec));
    if (detector) {
      providers::FaceSidecar sc;
      sc.image_id = entries[i].image_id;
      sc.faces = std::move(results[i].detected);
      detected.push_back(std::move(sc));
    }
  }
  if (!o.labels.empty()) dataset::attach_labels(records, dataset::load_labels(o.labels));

  const fs::path out(o.out);
  fs::create_directories(out);
  dataset::write_feature_records(out / "features.jsonl", records);
  if (detector) {
    std::ofstream f(out / "faces.jsonl", std::ios::binary);
    providers::write_face_sidecar(f, detected);
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + (out / "faces.jsonl").string());
  }
  write_stamp(out, ctx);
  std::cout << Json{{"images", n}, {"faces", records.size()}, {"embedder", embedder}}.dump()
            << '\n';
}

}  // namespace

void register_corpus_commands(CLI::App& app, Context& ctx) {
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  auto so = std::make_shared<SynthOptions>();
  synth->add_option("--images", so->images, "Number of images")->check(CLI::PositiveNumber);
  synth->add_flag("--non-separable", so->non_separable, "Overlap the subject and bystander ranges");
  synth->add_option("--width", so->width, "Image width");
  synth->add_option("--height", so->height, "Image height");
  synth->add_option("--out", so->out, "Output directory")->required();
  synth->callback([so, &ctx] { ctx.run = [so, &ctx] { run_synth(*so, ctx); }; });

  auto* features = app.add_subcommand("features", "Per-face feature extraction");
  features->require_subcommand(1);
  auto* extract = features->add_subcommand("extract", "Extract handcrafted features and embeddings");
  auto eo = std::make_shared<ExtractOptions>();
  extract->add_option("--manifest", eo->manifest, "Image manifest")
      ->required()
      ->check(CLI::ExistingFile);
  extract->add_option("--faces", eo->faces, "Face sidecar")->check(CLI::ExistingFile);
  extract->add_option("--detector", eo->detector, "ONNX face detector (used without --faces)")
      ->envname("FACEGATE_DETECTOR");
  extract->add_option("--detector-threshold", eo->detector_threshold, "Detector confidence cutoff")
      ->check(CLI::Range(0.0, 1.0));
  extract->add_option("--pose-model", eo->pose_model, "ONNX head-pose model")
      ->envname("FACEGATE_POSE");
  extract->add_option("--embedder", eo->embedder, "Embedding provider")
      ->check(CLI::IsMember({"auto", "none", "stub", "sidecar", "onnx"}));
  extract->add_option("--embeddings", eo->embeddings, "Embedding sidecar")
      ->check(CLI::ExistingFile);
  extract->add_option("--embed-model", eo->embed_model, "ONNX embedding model")
      ->envname("FACEGATE_EMBED");
  extract->add_option("--labels", eo->labels, "Ground-truth labels to attach")
      ->check(CLI::ExistingFile);
  extract->add_option("--out", eo->out, "Output directory")->required();
  extract->callback([eo, &ctx] { ctx.run = [eo, &ctx] { run_extract(*eo, ctx); }; });
}

}  // namespace facegate::cli
