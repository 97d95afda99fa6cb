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

// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failures.
#include <chrono>
#include <cmath>
#include <csignal>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <httplib.h>

#include "facegate/annotation_service.hpp"
#include "facegate/audit.hpp"
#include "facegate/classifier.hpp"
#include "facegate/dataset.hpp"
#include "facegate/error.hpp"
#include "facegate/evaluation.hpp"
#include "facegate/features.hpp"
#include "facegate/imaging.hpp"
#include "facegate/providers.hpp"
#include "facegate/seed.hpp"
#include "facegate/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace fg = facegate;
using fg::classifier::Label;
using fg::features::FeatureMask;
using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances.
constexpr double kLaplacianTol = 1e-9;
constexpr double kGradEps = 1e-4;
constexpr double kGradRelTol = 1e-3;
constexpr double kMetricTol = 1e-4;
constexpr double kKappaTol = 1e-12;
constexpr double kRandomKappaBound = 0.1;
constexpr double kMinTestAccuracy = 0.95;
constexpr double kContrastSeconds = 1.0;
constexpr double kGradientSeconds = 10.0;
constexpr double kTrainSeconds = 60.0;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) detail << what;
      ok = false;
    }
  }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

bool near(std::optional<double> v, double want, double tol) { return v && std::abs(*v - want) <= tol; }

template <typename F>
std::optional<fg::ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const fg::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

void contrast(Check& c) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 8);
  const auto start = Clock::now();
  for (int t = 0; t < 100; ++t) {
    const auto img = fg::testing::random_gray(rng, dim(rng), dim(rng), t % 2 ? 256 : 4);
    const double got = fg::imaging::contrast(img, img.bounds()).value;
    const double want = fg::testing::contrast_by_pairs(img);
    c.expect(got == want, "image " + std::to_string(t) + " differs from the pair oracle");
  }
  const double elapsed = seconds_since(start);
  const fg::imaging::GrayImage flat(8, 8, std::uint8_t{123});
  c.expect(fg::imaging::contrast(flat, flat.bounds()).value == 0.0, "constant image not 0");
  c.expect(elapsed < kContrastSeconds, "too slow");
  c.detail << (c.ok ? "" : "; ") << "100 images exact, " << elapsed << " s";
}

void laplacian(Check& c) {
  // 3 columns by 4 rows; interior responses -36 and 9.
  const fg::imaging::GrayImage img(3, 4, {0, 0, 0, 0, 9, 0, 0, 0, 0, 0, 0, 0});
  const auto m = fg::imaging::laplacian_variance(img, img.bounds());
  c.expect(!m.degenerate && std::abs(m.value - 506.25) <= kLaplacianTol, "fixture value");
  for (int w : {3, 5, 17}) {
    const fg::imaging::GrayImage flat(w, w + 1, std::uint8_t{77});
    c.expect(fg::imaging::laplacian_variance(flat, flat.bounds()).value == 0.0, "constant region not 0");
  }
  c.detail << (c.ok ? "" : "; ") << "value " << m.value;
}

void lengths_and_grid(Check& c) {
  c.expect(fg::features::input_dim(FeatureMask::kFF) == 20, "FF length");
  c.expect(fg::features::input_dim(FeatureMask::kFFFM) == 532, "FF+FM length");
  c.expect(fg::features::input_dim(FeatureMask::kFM) == 512, "FM length");
  // Every pixel centre lands in exactly one cell; cells tile the image as a
  // 3x3 grid of contiguous bands.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(1, 120);
  for (int t = 0; t < 100 && c.ok; ++t) {
    const int w = dim(rng), h = dim(rng);
    std::vector<int> col_of(w), row_of(h);
    for (int x = 0; x < w; ++x) col_of[x] = (fg::features::region_of({x + 0.5, 0.5}, w, h) - 1) % 3;
    for (int y = 0; y < h; ++y) row_of[y] = (fg::features::region_of({0.5, y + 0.5}, w, h) - 1) / 3;
    std::size_t covered = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int r = fg::features::region_of({x + 0.5, y + 0.5}, w, h);
        c.expect(r >= 1 && r <= 9, "cell out of range");
        c.expect(r == 1 + 3 * row_of[y] + col_of[x], "cell is not row x column");
        ++covered;
      }
    c.expect(covered == static_cast<std::size_t>(w) * h, "coverage");
    c.expect(std::is_sorted(col_of.begin(), col_of.end()) && std::is_sorted(row_of.begin(), row_of.end()),
             "bands not contiguous");
  }
  c.detail << (c.ok ? "" : "; ") << "20/532/512, grid partitions 100 random sizes";
}

void gradients(Check& c) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  const auto start = Clock::now();
  const int draws = 10;
  for (int d = 0; d < draws; ++d) {
    const auto model = fg::testing::random_model(FeatureMask::kFF, 100 + d);
    std::vector<std::vector<double>> xs(1 + d % 4, std::vector<double>(20));
    std::vector<Label> ys;
    for (auto& x : xs) {
      for (double& v : x) v = g(rng);
      ys.push_back(ys.size() % 2 ? Label::kBystander : Label::kSubject);
    }
    const auto r = fg::testing::check_gradients(model, xs, ys, kGradEps);
    worst = std::max(worst, r.max_relative_error);
    checked += r.checked;
    skipped += r.skipped;
  }
  const double elapsed = seconds_since(start);
  c.expect(worst < kGradRelTol, "relative error");
  c.expect(elapsed < kGradientSeconds, "too slow");
  c.expect(skipped * 100 < checked + skipped, "more than 1% of parameters on a ReLU kink");
  c.detail << (c.ok ? "" : "; ") << draws << " draws, " << checked << " parameters (" << skipped
           << " on a kink), max rel err " << worst << ", " << elapsed << " s";
}

void training(Check& c) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto start = Clock::now();
    const auto corpus = fg::evaluation::generate_synthetic_dataset({.seed = seed, .n_images = 200});
    const auto examples = fg::dataset::to_examples(corpus.records(), FeatureMask::kFF);
    const auto ids = fg::dataset::image_ids_of(examples);
    const auto split = fg::evaluation::split_80_10_10(ids, fg::derive_seed(seed, "split"));
    std::vector<fg::classifier::LabeledExample> train;
    for (auto i : split.train) train.push_back(examples[i]);
    fg::classifier::TrainConfig cfg;
    cfg.seed = fg::derive_seed(seed, "train");
    const auto model = fg::classifier::train(train, cfg).model;
    std::vector<Label> pred, truth;
    for (auto i : split.test) {
      pred.push_back(fg::classifier::predict(model, examples[i].features).label);
      truth.push_back(examples[i].label);
    }
    const double acc = fg::evaluation::metrics(fg::evaluation::confusion(pred, truth)).accuracy.value_or(0);
    const double elapsed = seconds_since(start);
    c.expect(acc >= kMinTestAccuracy, "seed " + std::to_string(seed) + " accuracy");
    c.expect(elapsed < kTrainSeconds, "seed " + std::to_string(seed) + " too slow");
    c.detail << (seed == 1 && c.ok ? "" : " ") << "seed " << seed << ": " << acc << " (" << elapsed << " s)";
  }
}

void metrics(Check& c) {
  const auto m = fg::evaluation::metrics({.tp = 3, .fp = 2, .tn = 4, .fn = 1});
  c.expect(near(m.accuracy, 0.7, kMetricTol), "accuracy");
  c.expect(near(m.precision, 0.6, kMetricTol), "precision");
  c.expect(near(m.recall_tpr, 0.75, kMetricTol), "recall");
  c.expect(near(m.f1, 0.6667, kMetricTol), "f1");
  c.expect(near(m.fpr, 0.3333, kMetricTol), "fpr");
  const auto perfect = fg::evaluation::metrics({.tp = 5, .fp = 0, .tn = 5, .fn = 0});
  c.expect(near(perfect.accuracy, 1.0, 0) && near(perfect.fpr, 0.0, 0), "perfect classifier");
  const auto no_neg = fg::evaluation::metrics({.tp = 0, .fp = 0, .tn = 0, .fn = 3});
  c.expect(!no_neg.precision && !no_neg.fpr && !no_neg.f1, "zero denominators not flagged");
  c.expect(code_of([] { fg::evaluation::metrics({}); }) == fg::ErrorCode::kEmptyInput, "empty matrix accepted");
  c.detail << (c.ok ? "" : "; ") << "fixture, perfect and zero-denominator cases";
}

void kappa(Check& c) {
  const auto k = fg::evaluation::cohen_kappa_table({{20, 5}, {10, 15}});
  c.expect(near(k.kappa, 0.4, kKappaTol), "2x2 table");
  const std::vector<int> a = {0, 1, 2, 1, 0, 2};
  c.expect(near(fg::evaluation::cohen_kappa(a, a).kappa, 1.0, kKappaTol), "cohen perfect");
  c.expect(near(fg::evaluation::fleiss_kappa({{3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {3, 0, 0}}).kappa, 1.0, kKappaTol),
           "fleiss perfect");
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> cat(0, 2);
  const std::size_t n = 10000;
  std::vector<int> x(n), y(n);
  std::vector<std::vector<long long>> ratings(n, std::vector<long long>(3, 0));
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = cat(rng);
    y[i] = cat(rng);
    for (int r = 0; r < 3; ++r) ++ratings[i][cat(rng)];
  }
  const auto rc = fg::evaluation::cohen_kappa(x, y).kappa;
  const auto rf = fg::evaluation::fleiss_kappa(ratings).kappa;
  c.expect(rc && std::abs(*rc) < kRandomKappaBound, "random cohen");
  c.expect(rf && std::abs(*rf) < kRandomKappaBound, "random fleiss");
  c.detail << (c.ok ? "" : "; ") << "kappa " << k.kappa.value_or(NAN) << ", random cohen " << rc.value_or(NAN)
           << ", random fleiss " << rf.value_or(NAN);
}

std::vector<std::string> random_corpus(std::mt19937_64& rng, std::size_t images) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < images; ++i)
    for (std::size_t f = 0, n = 1 + rng() % 6; f < n; ++f) ids.push_back("img" + std::to_string(i));
  std::shuffle(ids.begin(), ids.end(), rng);
  return ids;
}

std::set<std::string> images_of(const std::vector<std::size_t>& idx, const std::vector<std::string>& ids) {
  std::set<std::string> out;
  for (auto i : idx) out.insert(ids[i]);
  return out;
}

void partitions(Check& c) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const std::size_t images = 10 + rng() % 150;
    const auto ids = random_corpus(rng, images);
    const std::size_t k = 2 + rng() % 9;
    const auto folds = fg::evaluation::k_fold(ids, k, t);
    std::vector<int> seen(ids.size(), 0);
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& f : folds) {
      c.expect(f.train.size() + f.test.size() == ids.size(), "fold does not cover");
      for (auto i : f.test) ++seen[i];
      const auto te = images_of(f.test, ids), tr = images_of(f.train, ids);
      for (const auto& i : te) c.expect(!tr.count(i), "image in train and test");
      lo = std::min(lo, te.size());
      hi = std::max(hi, te.size());
    }
    c.expect(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }), "face not tested once");
    c.expect(hi - lo <= 1, "fold sizes unbalanced");
    const auto s = fg::evaluation::split_80_10_10(ids, t);
    c.expect(s.train.size() + s.validation.size() + s.test.size() == ids.size(), "split does not cover");
    const auto tr = images_of(s.train, ids), va = images_of(s.validation, ids), te = images_of(s.test, ids);
    c.expect(tr.size() + va.size() + te.size() == images, "split shares images");
    c.expect(tr.size() == static_cast<std::size_t>(std::llround(0.8 * images)), "train share");
    c.expect(fg::evaluation::split_80_10_10(ids, t).test == s.test, "split not deterministic");
  }
  c.expect(code_of([] { fg::evaluation::k_fold(std::vector<std::string>{"a", "b"}, 1, 0); }) ==
               fg::ErrorCode::kInvalidK,
           "k=1 accepted");
  c.detail << (c.ok ? "" : "; ") << "50 random corpora, k-fold and 80-10-10";
}

void audit(Check& c) {
  using namespace fg::audit;
  const auto dir = fg::testing::fixtures() / "audit_golden";
  PipelineInputs in;
  in.manifest = fg::providers::load_manifest(dir / "manifest.jsonl");
  in.sidecars = fg::providers::load_face_sidecar(dir / "faces.jsonl", in.manifest);
  in.regions = fg::providers::load_manipulation_regions(dir / "regions.jsonl", in.manifest);
  in.annotations = load_annotations(dir / "annotations.jsonl");
  in.labels = fg::dataset::load_labels(dir / "labels.jsonl");
  in.embeddings = fg::providers::load_embedding_sidecar(dir / "embeddings.jsonl");
  in.profiles = fg::providers::load_profiles(dir / "profiles.jsonl");
  const auto result = build_audit_images(in, {});
  AuditAccumulator acc;
  for (const auto& i : result.images) acc.add(i);
  const auto rep = acc.report();
  c.expect(rep.images == 10 && rep.celebrity_dropped == 1 && rep.uploaders == 4, "image counts");
  c.expect(result.excluded_images == 1, "excluded images");
  c.expect(rep.face_counts.at("Friend") == 8 && rep.face_counts.at("Uploader") == 2 &&
               rep.face_counts.at("Bystander*") == 7 && rep.face_counts.at("Subject") == 10 &&
               rep.face_counts.at("Bystander") == 7,
           "face counts");
  const auto& lv = rep.face_levels;
  c.expect(lv.at("No anonymization").at("Friend") == 5 && lv.at("No anonymization").at("Bystander*") == 3 &&
               lv.at("Partial anonymization").at("Friend") == 3 &&
               lv.at("Partial anonymization").at("Bystander*") == 2 &&
               lv.at("Full anonymization").at("Bystander*") == 2,
           "face levels");
  c.expect(rep.privacy_classes.at("1") == 8 && rep.privacy_classes.at("2") == 6 && rep.privacy_classes.at("3") == 2,
           "privacy classes");
  for (const auto& t : rep.chi_square) {
    if (t.name.rfind("Friend/", 0) == 0)
      c.expect(near(t.statistic, 0.75, 1e-12) && t.dof == 1, "chi-square " + t.name);
    else
      c.expect(!t.statistic, "chi-square " + t.name + " should be undefined");
  }
  c.expect(conservation_violations(rep).empty(), "conservation");

  // Rule fixtures.
  c.expect(face_class(true, false) == FaceClass::kA && face_class(true, true) == FaceClass::kB &&
               face_class(false, true) == FaceClass::kC,
           "face class");
  c.expect(code_of([] { face_class(false, false); }) == fg::ErrorCode::kNotAFace, "not a face");
  const ManipulationCoding eye{FaceVerification::kContainsFace, ManipulationVerification::kManipulated,
                               {Intention::kPrivacy}, {Part::kEye}, {Method::kBlur}};
  const ManipulationCoding ear{FaceVerification::kContainsFace, ManipulationVerification::kManipulated,
                               {Intention::kPrivacy}, {Part::kEar}, {Method::kBlur}};
  const ManipulationCoding none{FaceVerification::kContainsFace, ManipulationVerification::kNotManipulated,
                                {Intention::kUnknown}, {}, {}};
  c.expect(anonymization_level(FaceClass::kB, eye) == AnonymizationLevel::kPartial, "partial");
  c.expect(anonymization_level(FaceClass::kB, ear) == AnonymizationLevel::kNone, "ear only");
  c.expect(anonymization_level(FaceClass::kC, eye) == AnonymizationLevel::kFull, "full");
  c.expect(anonymization_level(FaceClass::kA, none) == AnonymizationLevel::kNone, "untouched");
  c.expect(code_of([&] { anonymization_level(FaceClass::kA, eye); }) == fg::ErrorCode::kInconsistentCoding,
           "inconsistent coding");
  c.expect(categorize_person(Label::kBystander, true) == PersonCategory::kUploader &&
               categorize_person(Label::kSubject, false) == PersonCategory::kFriend &&
               categorize_person(Label::kBystander, false) == PersonCategory::kBystanderStar,
           "categories");
  c.expect(!privacy_class(PersonCategory::kUploader, AnonymizationLevel::kNone) &&
               privacy_class(PersonCategory::kFriend, AnonymizationLevel::kFull) == PrivacyClass::k3 &&
               privacy_class(PersonCategory::kBystanderStar, AnonymizationLevel::kPartial) == PrivacyClass::k2,
           "privacy class");
  c.detail << (c.ok ? "" : "; ") << "golden corpus tables and rule fixtures";
}

void serialization(Check& c) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 2.0);
  for (FeatureMask mask : {FeatureMask::kFF, FeatureMask::kFM, FeatureMask::kFFFM}) {
    auto model = fg::testing::random_model(mask, 9);
    const std::size_t d = fg::features::input_dim(mask);
    std::vector<fg::features::FeatureVector> xs;
    for (int i = 0; i < 100; ++i) {
      fg::features::FeatureVector v{std::vector<double>(d), mask};
      for (double& x : v.values) x = g(rng);
      xs.push_back(std::move(v));
    }
    model.scaler = fg::features::fit_scaler(xs);
    std::stringstream buf;
    fg::classifier::save_model(model, buf);
    const std::string bytes = buf.str();
    std::istringstream back_in(bytes);
    const auto back = fg::classifier::load_model(back_in);
    for (const auto& x : xs) {
      const auto a = fg::classifier::predict(model, x), b = fg::classifier::predict(back, x);
      c.expect(a.label == b.label && a.bystander_probability == b.bystander_probability, "prediction changed");
    }
    auto load = [](std::string s) {
      std::istringstream in(s);
      fg::classifier::load_model(in);
    };
    std::string flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    c.expect(code_of([&] { load(flipped); }) == fg::ErrorCode::kFormatError, "bit flip");
    c.expect(code_of([&] { load(bytes.substr(0, bytes.size() - 5)); }) == fg::ErrorCode::kFormatError, "truncation");
    std::string future = bytes;
    future[8] = 2;
    c.expect(code_of([&] { load(future); }) == fg::ErrorCode::kUnsupportedVersion, "future version");
  }
  c.detail << (c.ok ? "" : "; ") << "3 masks x 100 inputs, corrupt/truncated/future files typed";
}

// ---------------------------------------------------------------------------
// Service durability, through the real binary.

Json coding_json(const std::string& intention) {
  return {{"face_verification", "contains_face"},
          {"manipulation_verification", "manipulated"},
          {"intentions", {intention}},
          {"parts", {"eye"}},
          {"methods", {"blur"}}};
}

void durability(Check& c) {
  const auto g = fg::testing::fixtures() / "audit_golden";
  fg::testing::TempDir tmp("accept");
  const std::vector<std::string> args = {"annotate",   "serve",
                                         "--manifest", (g / "manifest.jsonl").string(),
                                         "--regions",  (g / "regions.jsonl").string(),
                                         "--port",     "0",
                                         "--data",     (tmp / "data").string()};
  const std::vector<std::string> tasks = {"img02:r1", "img03:r1", "img04:r1", "img05:r1"};
  const std::vector<std::vector<std::string>> intents = {
      {"privacy", "privacy", "privacy"}, {"privacy", "humor", "beauty"}, {"humor", "humor", "privacy"}, {"beauty"}};

  std::map<std::string, std::vector<fg::audit::AnnotationRecord>> sent;
  std::size_t acked = 0;
  {
    fg::testing::Child server(args);
    const auto hello = Json::parse(server.read_line());
    httplib::Client cli("127.0.0.1", hello["port"].get<int>());
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      for (std::size_t a = 0; a < intents[t].size(); ++a) {
        const Json body = {{"annotator_id", "a" + std::to_string(a + 1)}, {"coding", coding_json(intents[t][a])}};
        auto res = cli.Post("/v1/tasks/" + tasks[t] + "/annotations", body.dump(), "application/json");
        if (!res || res->status != 201) continue;
        ++acked;
        const auto colon = tasks[t].find(':');
        Json full = body;
        full["image_id"] = tasks[t].substr(0, colon);
        full["region_id"] = tasks[t].substr(colon + 1);
        std::vector<std::string> errors;
        sent[tasks[t]].push_back(*fg::audit::record_from_json(full, errors));
      }
    }
    server.signal(SIGKILL);
    server.wait();
  }
  c.expect(acked == 10, "not every POST acknowledged");

  fg::testing::Child server(args);
  const auto hello = Json::parse(server.read_line());
  httplib::Client cli("127.0.0.1", hello["port"].get<int>());
  std::size_t restored = 0;
  for (const auto& id : tasks) {
    auto res = cli.Get("/v1/tasks/" + id);
    if (!res || res->status != 200) {
      c.expect(false, "task " + id + " unreadable after restart");
      continue;
    }
    restored += Json::parse(res->body)["records"].size();

    auto cres = cli.Get("/v1/tasks/" + id + "/consensus");
    const auto served = Json::parse(cres->body)["consensus"];
    const auto want = fg::audit::consensus(sent[id], 3);
    c.expect(served["coding"] == fg::audit::to_json(want.coding), "consensus coding for " + id);
    c.expect(served["escalated"] == want.escalated, "escalation for " + id);
    c.expect(served["records"] == want.records, "record count for " + id);
  }
  c.expect(restored == acked, "records lost across restart");

  // Agreement over the three complete tasks, intentions field, computed
  // directly from the sent records.
  std::vector<std::string> order;
  std::map<std::string, std::size_t> cat;
  for (const auto& id : tasks)
    if (sent[id].size() == 3) order.push_back(id);
  auto value = [](const fg::audit::AnnotationRecord& r) {
    return std::string(fg::audit::to_string(*r.coding.intentions.begin()));
  };
  for (const auto& id : order)
    for (const auto& r : sent[id]) cat.try_emplace(value(r), 0);
  std::size_t next = 0;
  for (auto& [v, i] : cat) i = next++;
  std::vector<std::vector<long long>> ratings;
  std::map<std::string, std::vector<std::string>> by_rater;
  for (const auto& id : order) {
    std::vector<long long> row(cat.size(), 0);
    for (const auto& r : sent[id]) {
      ++row[cat[value(r)]];
      by_rater[r.annotator_id].push_back(value(r));
    }
    ratings.push_back(row);
  }
  const auto fleiss = fg::evaluation::fleiss_kappa(ratings);
  const auto agreement = Json::parse(cli.Get("/v1/agreement")->body);
  const auto& field = agreement["fields"]["intentions"];
  c.expect(agreement["tasks"] == order.size(), "agreement task count");
  c.expect(near(field["fleiss"]["kappa"].is_null() ? std::nullopt : std::optional(field["fleiss"]["kappa"].get<double>()),
                fleiss.kappa.value_or(NAN), kKappaTol),
           "fleiss endpoint");
  std::size_t pairs = 0;
  for (const auto& p : field["cohen"]) {
    const auto want = fg::evaluation::cohen_kappa(std::span<const std::string>(by_rater[p["a"]]),
                                                  std::span<const std::string>(by_rater[p["b"]]));
    const bool served = !p["kappa"].is_null();
    c.expect(served == want.kappa.has_value() &&
                 (!served || std::abs(p["kappa"].get<double>() - want.kappa.value_or(NAN)) <= kKappaTol),
             "cohen endpoint");
    ++pairs;
  }
  c.expect(pairs == 3, "cohen pairs");
  server.signal(SIGTERM);
  server.wait();
  c.detail << (c.ok ? "" : "; ") << acked << " acknowledged, " << restored << " restored after SIGKILL, fleiss "
           << fleiss.kappa.value_or(NAN);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"contrast matches the adjacent-pair oracle", contrast},
      {"laplacian variance fixture", laplacian},
      {"feature lengths and region grid", lengths_and_grid},
      {"analytic gradients", gradients},
      {"FF training on the separable corpus, 5 seeds", training},
      {"classification metrics", metrics},
      {"cohen and fleiss kappa", kappa},
      {"image-grouped partitions", partitions},
      {"audit golden corpus and rules", audit},
      {"model serialization", serialization},
      {"annotation service durability", durability},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << "exception: " << e.what();
    }
    std::cout << (c.ok ? "PASS " : "FAIL ") << i + 1 << ": " << criteria[i].first << " (" << c.detail.str() << ")"
              << std::endl;
    failures += c.ok ? 0 : 1;
  }
  return failures;
}
