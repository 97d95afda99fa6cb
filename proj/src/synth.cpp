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

#include "facegate/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "facegate/error.hpp"
#include "facegate/image_io.hpp"
#include "facegate/jsonl.hpp"
#include "facegate/providers.hpp"
#include "facegate/seed.hpp"

namespace facegate::evaluation {

namespace {

using classifier::Label;
using features::FaceObservation;
using features::HeadPose;
using features::Point;
using imaging::GrayImage;
using imaging::RectRegion;

// Distribution helpers over raw 64-bit draws, so corpora do not depend on
// the standard library's distribution implementations.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
  double normal(double sd) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  bool coin() { return (rng_() >> 63) != 0; }

 private:
  std::mt19937_64 rng_;
};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

double clamp_angle(double v) { return round2(std::clamp(v, -180.0, 180.0)); }

int subject_count(Draw& d) {
  const double u = d.uniform();
  if (u < 0.40) return 1;
  if (u < 0.65) return 2;
  if (u < 0.80) return 3;
  if (u < 0.90) return 4;
  if (u < 0.95) return 5;
  return d.integer(6, 8);
}

struct Shape {
  RectRegion box;
  Label label;
};

// Fills the ellipse inscribed in box with a textured tone. Bystander texture
// is box-filtered so it reads as out of focus.
void paint_face(GrayImage& img, const RectRegion& box, Label label, bool separable, Draw& d) {
  const bool sharp = label == Label::kSubject || (!separable && d.uniform() < 0.3);
  const double tone = d.uniform(110.0, 190.0);
  const double amp = sharp ? d.uniform(35.0, 55.0) : d.uniform(6.0, 14.0);
  std::vector<double> tex(static_cast<std::size_t>(box.w) * box.h);
  for (double& t : tex) t = tone + d.uniform(-amp, amp);
  if (!sharp) {
    std::vector<double> blurred(tex.size());
    for (int y = 0; y < box.h; ++y) {
      for (int x = 0; x < box.w; ++x) {
        double s = 0.0;
        int n = 0;
        for (int dy = -2; dy <= 2; ++dy) {
          for (int dx = -2; dx <= 2; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (xx < 0 || yy < 0 || xx >= box.w || yy >= box.h) continue;
            s += tex[static_cast<std::size_t>(yy) * box.w + xx];
            ++n;
          }
        }
        blurred[static_cast<std::size_t>(y) * box.w + x] = s / n;
      }
    }
    tex.swap(blurred);
  }
  const double rx = box.w / 2.0, ry = box.h / 2.0;
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      const double nx = (x + 0.5 - rx) / rx, ny = (y + 0.5 - ry) / ry;
      if (nx * nx + ny * ny > 1.0) continue;
      const double v = std::clamp(tex[static_cast<std::size_t>(y) * box.w + x], 0.0, 255.0);
      img.at(box.x + x, box.y + y) = static_cast<std::uint8_t>(std::lround(v));
    }
  }
}

// Smooth horizontal/vertical gradient, nearly flat under the Laplacian.
void paint_background(GrayImage& img, Draw& d) {
  const double base = d.uniform(70.0, 140.0);
  const double gx = d.uniform(-30.0, 30.0), gy = d.uniform(-30.0, 30.0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double v = base + gx * x / img.width() + gy * y / img.height();
      img.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
  }
}

RectRegion place(Draw& d, int side, int w, int h, bool central) {
  double cx, cy;
  if (central) {
    cx = d.uniform(0.3, 0.7) * w;
    cy = d.uniform(0.3, 0.65) * h;
  } else {
    cx = d.uniform(0.0, 1.0) * w;
    cy = d.uniform(0.0, 1.0) * h;
  }
  const int x = std::clamp(static_cast<int>(std::lround(cx - side / 2.0)), 0, w - side);
  const int y = std::clamp(static_cast<int>(std::lround(cy - side / 2.0)), 0, h - side);
  return {x, y, side, side};
}

HeadPose pose_for(Label label, bool separable, Draw& d) {
  if (label == Label::kSubject) {
    return {clamp_angle(d.normal(8.0)), clamp_angle(d.normal(6.0)), clamp_angle(d.normal(5.0))};
  }
  const double lo = separable ? 25.0 : 5.0;
  const double yaw = (d.coin() ? 1.0 : -1.0) * d.uniform(lo, 80.0);
  return {clamp_angle(yaw), clamp_angle(d.normal(12.0)), clamp_angle(d.normal(10.0))};
}

SynthImage make_image(const SynthConfig& cfg, std::size_t index,
                      const providers::StubEmbeddingProvider& stub) {
  Draw d(derive_seed(cfg.seed, "synth-image") + 0x9e3779b97f4a7c15ULL * (index + 1));
  SynthImage img;
  char id[32];
  std::snprintf(id, sizeof id, "img%05zu", index);
  img.image_id = id;
  const std::size_t uploaders = std::max<std::size_t>(1, cfg.n_images / 4);
  std::snprintf(id, sizeof id, "u%04zu", index % uploaders);
  img.uploader_id = id;
  img.pixels = GrayImage(cfg.width, cfg.height, std::uint8_t{0});
  paint_background(img.pixels, d);

  const int n_subj = subject_count(d);
  const int n_by = d.integer(0, 4);
  const double s_max = d.uniform(0.30, 0.45) * cfg.height;
  const double subj_lo = cfg.separable ? 0.70 : 0.55;
  const double by_lo = cfg.separable ? 0.20 : 0.35;
  const double by_hi = cfg.separable ? 0.40 : 0.90;

  std::vector<Shape> shapes;
  // The first subject carries the largest face in the image.
  for (int i = 0; i < n_subj; ++i) {
    const double f = i == 0 ? 1.0 : d.uniform(subj_lo, 1.0);
    const int side = std::max(8, static_cast<int>(std::lround(s_max * f)));
    shapes.push_back({place(d, side, cfg.width, cfg.height, true), Label::kSubject});
  }
  for (int i = 0; i < n_by; ++i) {
    const int side = std::max(8, static_cast<int>(std::lround(s_max * d.uniform(by_lo, by_hi))));
    shapes.push_back({place(d, side, cfg.width, cfg.height, false), Label::kBystander});
  }
  // Bystanders are painted first so subjects stay on top.
  for (Label pass : {Label::kBystander, Label::kSubject}) {
    for (const auto& s : shapes) {
      if (s.label == pass) paint_face(img.pixels, s.box, s.label, cfg.separable, d);
    }
  }

  std::vector<FaceObservation> faces;
  std::vector<Label> labels;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& s = shapes[i];
    FaceObservation f;
    f.face_id = img.image_id + "_f" + std::to_string(i);
    f.box = s.box;
    f.eye_left = Point{s.box.x + 0.3 * s.box.w, s.box.y + 0.4 * s.box.h};
    f.eye_right = Point{s.box.x + 0.7 * s.box.w, s.box.y + 0.4 * s.box.h};
    f.pose = pose_for(s.label, cfg.separable, d);
    f.detected = true;
    f.confidence = round2(d.uniform(0.90, 1.0));
    faces.push_back(std::move(f));
    labels.push_back(s.label);
  }
  const auto hand = features::extract_all(img.pixels, faces);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    SynthFace sf;
    sf.face = faces[i];
    sf.label = labels[i];
    sf.features = hand[i];
    sf.embedding = stub.embed({img.image_id, faces[i], nullptr});
    // A weak class cue in the first 32 embedding dimensions.
    const double shift = labels[i] == Label::kBystander ? 0.5 : -0.5;
    for (std::size_t k = 0; k < 32; ++k) sf.embedding.values[k] += shift;
    img.faces.push_back(std::move(sf));
  }
  return img;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::vector<dataset::FaceRecord> SyntheticCorpus::records() const {
  std::vector<dataset::FaceRecord> out;
  for (const auto& img : images) {
    for (const auto& f : img.faces) {
      out.push_back({img.image_id, f.face.face_id, f.features, f.embedding, f.label});
    }
  }
  return out;
}

std::size_t SyntheticCorpus::face_count() const {
  std::size_t n = 0;
  for (const auto& img : images) n += img.faces.size();
  return n;
}

SyntheticCorpus generate_synthetic_dataset(const SynthConfig& config) {
  if (config.n_images == 0) throw Error(ErrorCode::kConfigError, "n_images must be >= 1");
  if (config.width < 64 || config.height < 48) {
    throw Error(ErrorCode::kConfigError, "synthetic images must be at least 64x48");
  }
  SyntheticCorpus corpus;
  corpus.config = config;
  corpus.images.resize(config.n_images);
  const providers::StubEmbeddingProvider stub(derive_seed(config.seed, "synth-embed"));
  const auto n = static_cast<long long>(config.n_images);
#pragma omp parallel for schedule(dynamic, 4)
  for (long long i = 0; i < n; ++i) {
    corpus.images[i] = make_image(config, static_cast<std::size_t>(i), stub);
  }
  return corpus;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  std::vector<providers::ImageManifestEntry> entries;
  std::vector<providers::FaceSidecar> sidecars;
  dataset::LabelTable labels;
  for (const auto& img : corpus.images) {
    const std::filesystem::path rel = std::filesystem::path("images") / (img.image_id + ".png");
    imaging::write_png(dir / rel, img.pixels);
    providers::ImageManifestEntry e;
    e.image_id = img.image_id;
    e.path = rel;
    e.uploader_id = img.uploader_id;
    e.width = img.pixels.width();
    e.height = img.pixels.height();
    entries.push_back(std::move(e));
    providers::FaceSidecar sc;
    sc.image_id = img.image_id;
    for (const auto& f : img.faces) {
      sc.faces.push_back(f.face);
      labels[{img.image_id, f.face.face_id}] = f.label;
    }
    sidecars.push_back(std::move(sc));
  }
  {
    auto out = open_out(dir / "manifest.jsonl");
    providers::write_manifest(out, providers::Manifest(std::move(entries)));
  }
  {
    auto out = open_out(dir / "faces.jsonl");
    providers::write_face_sidecar(out, sidecars);
  }
  {
    auto out = open_out(dir / "embeddings.jsonl");
    out << jsonl::header(providers::kEmbeddingsSchema, providers::kSchemaVersion).dump() << '\n';
    for (const auto& img : corpus.images) {
      for (const auto& f : img.faces) {
        providers::write_embedding_record(out, img.image_id, f.face.face_id, f.embedding);
      }
    }
  }
  dataset::write_labels(dir / "labels.jsonl", labels);
  dataset::write_feature_records(dir / "features.jsonl", corpus.records());
}

MarginReport margin_check(const SyntheticCorpus& corpus) {
  MarginReport best;
  best.margin = -std::numeric_limits<double>::infinity();
  for (std::size_t dim = 0; dim < features::kHandcraftedDim; ++dim) {
    double s_min = std::numeric_limits<double>::infinity(), s_max = -s_min;
    double b_min = s_min, b_max = -s_min;
    for (const auto& img : corpus.images) {
      for (const auto& f : img.faces) {
        const double v = f.features[dim];
        if (f.label == Label::kSubject) {
          s_min = std::min(s_min, v);
          s_max = std::max(s_max, v);
        } else {
          b_min = std::min(b_min, v);
          b_max = std::max(b_max, v);
        }
      }
    }
    if (!std::isfinite(s_min) || !std::isfinite(b_min)) continue;  // one class absent
    // Either subjects above bystanders or below them.
    const double up = s_min - b_max, down = b_min - s_max;
    const double margin = std::max(up, down);
    if (margin > best.margin) {
      best.dimension = dim;
      best.margin = margin;
      best.threshold = up >= down ? (s_min + b_max) / 2.0 : (b_min + s_max) / 2.0;
    }
  }
  return best;
}

}  // namespace facegate::evaluation
