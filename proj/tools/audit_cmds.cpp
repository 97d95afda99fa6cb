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

// audit run, audit report, annotate serve
#include <csignal>
#include <iostream>
#include <memory>
#include <thread>

#include <pthread.h>

#include "cli_common.hpp"
#include "facegate/annotation_service.hpp"
#include "facegate/audit.hpp"
#include "facegate/jsonl.hpp"

namespace facegate::cli {

namespace {

void report_outputs(const audit::AuditReport& report, const fs::path& out) {
  audit::export_report(report, out);
  for (const auto& v : audit::conservation_violations(report)) warn("conservation: " + v);
}

struct AuditRunCmd {
  std::string manifest;
  std::string faces;
  std::string regions;
  std::string annotations;
  std::string labels;
  std::string embeddings;
  std::string profiles;
  double tau = audit::kDefaultMatchThreshold;
  std::size_t n_annotators = 3;
  double iou = 0.5;
  bool yates = false;
  std::string out;
};

void run_audit(const AuditRunCmd& o, const Context& ctx) {
  audit::PipelineInputs in;
  in.manifest = providers::load_manifest(o.manifest);
  in.sidecars = providers::load_face_sidecar(o.faces, in.manifest);
  if (!o.regions.empty()) in.regions = providers::load_manipulation_regions(o.regions, in.manifest);
  if (!o.annotations.empty()) in.annotations = audit::load_annotations(o.annotations);
  if (!o.labels.empty()) in.labels = dataset::load_labels(o.labels);
  if (!o.embeddings.empty()) in.embeddings = providers::load_embedding_sidecar(o.embeddings);
  if (!o.profiles.empty()) in.profiles = providers::load_profiles(o.profiles);

  audit::PipelineConfig cfg;
  cfg.n_annotators = o.n_annotators;
  cfg.tau = o.tau;
  cfg.iou_threshold = o.iou;
  const auto result = audit::build_audit_images(in, cfg);
  for (const auto& w : result.warnings) warn(w);

  audit::AuditAccumulator acc;
  for (const auto& img : result.images) acc.add(img);
  const auto report = acc.report(o.yates);

  const fs::path out(o.out);
  fs::create_directories(out);
  audit::write_audit_images(out / "audit_faces.jsonl", result.images);
  report_outputs(report, out);
  write_stamp(out, ctx);
  std::cout << Json{{"images", report.images},
                    {"celebrity_dropped", report.celebrity_dropped},
                    {"excluded_images", result.excluded_images},
                    {"uploaders", report.uploaders}}
                   .dump()
            << '\n';
}

struct AuditReportCmd {
  std::vector<std::string> inputs;
  bool yates = false;
  std::string out;
};

// Shards aggregate independently and merge.
void run_report(const AuditReportCmd& o, const Context& ctx) {
  audit::AuditAccumulator total;
  for (const auto& path : o.inputs) {
    audit::AuditAccumulator shard;
    for (const auto& img : audit::load_audit_images(path)) shard.add(img);
    total.merge(shard);
  }
  const auto report = total.report(o.yates);
  const fs::path out(o.out);
  fs::create_directories(out);
  report_outputs(report, out);
  write_stamp(out, ctx);
  std::cout << audit::summary_text(report);
}

struct ServeCmd {
  std::string manifest;
  std::string regions;
  std::string faces;
  std::string data = "annotation-data";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t n_annotators = 3;
  double iou = 0.5;
  std::string hints;
  std::string out;
};

std::vector<std::pair<std::string, service::Hint>> load_hints(const fs::path& path) {
  std::vector<std::pair<std::string, service::Hint>> out;
  jsonl::for_each_record(path, "facegate.predictions", 1, [&](const Json& j, std::size_t line) {
    const std::string where = jsonl::location(path.string(), line);
    service::Hint h;
    h.face_id = jsonl::require_string(j, "face_id", where);
    h.label = classifier::parse_label(jsonl::require_string(j, "label", where));
    h.bystander_probability = jsonl::require_number(j, "bystander_probability", where);
    out.emplace_back(jsonl::require_string(j, "image_id", where), h);
  });
  return out;
}

void run_serve(const ServeCmd& o, const Context& ctx) {
  auto manifest = providers::load_manifest(o.manifest);
  auto regions = providers::load_manipulation_regions(o.regions, manifest);
  std::vector<providers::FaceSidecar> faces;
  if (!o.faces.empty()) faces = providers::load_face_sidecar(o.faces, manifest);
  const fs::path data(o.data);
  fs::create_directories(data);
  auto journal = std::make_unique<service::Journal>(data / "journal.jsonl");
  service::BoardConfig cfg;
  cfg.n_annotators = o.n_annotators;
  cfg.iou_threshold = o.iou;
  auto board = std::make_shared<service::TaskBoard>(std::move(manifest), std::move(regions),
                                                    std::move(faces), std::move(journal), cfg);
  if (!o.hints.empty()) board->import_predictions(load_hints(o.hints));
  write_stamp(o.out.empty() ? data : fs::path(o.out), ctx);

  // Signals are taken synchronously by a dedicated thread.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  service::AnnotationServer server(board);
  const int port = server.bind(service::ServerConfig{o.host, o.port});
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  std::cout << Json{{"event", "listening"},
                    {"host", o.host},
                    {"port", port},
                    {"journal", (data / "journal.jsonl").string()},
                    {"tasks", board->tasks().size()}}
                   .dump()
            << std::endl;
  server.serve();
  // Unblock the waiter if serve() returned on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  board->compact();
}

}  // namespace

void register_audit_commands(CLI::App& app, Context& ctx) {
  auto* audit_cmd = app.add_subcommand("audit", "Face privacy audit");
  audit_cmd->require_subcommand(1);

  auto* run = audit_cmd->add_subcommand("run", "Resolve faces and aggregate a corpus");
  auto ro = std::make_shared<AuditRunCmd>();
  run->add_option("--manifest", ro->manifest, "Image manifest")->required()->check(CLI::ExistingFile);
  run->add_option("--faces", ro->faces, "Face sidecar")->required()->check(CLI::ExistingFile);
  run->add_option("--regions", ro->regions, "Manipulation regions")->check(CLI::ExistingFile);
  run->add_option("--annotations", ro->annotations, "Annotation records")->check(CLI::ExistingFile);
  run->add_option("--labels", ro->labels, "Subject/bystander labels")->check(CLI::ExistingFile);
  run->add_option("--embeddings", ro->embeddings, "Face embeddings")->check(CLI::ExistingFile);
  run->add_option("--profiles", ro->profiles, "Uploader profile embeddings")
      ->check(CLI::ExistingFile);
  run->add_option("--tau", ro->tau, "Uploader match threshold (cosine)")->check(CLI::Range(-1.0, 1.0));
  run->add_option("--n-annotators", ro->n_annotators, "Codings required per region")
      ->check(CLI::PositiveNumber);
  run->add_option("--iou", ro->iou, "Face-to-region IoU fallback")->check(CLI::Range(0.0, 1.0));
  run->add_flag("--yates", ro->yates, "Continuity correction for 2x2 chi-square tables");
  run->add_option("--out", ro->out, "Output directory")->required();
  run->callback([ro, &ctx] { ctx.run = [ro, &ctx] { run_audit(*ro, ctx); }; });

  auto* report = audit_cmd->add_subcommand("report", "Aggregate audit face streams into tables");
  auto po = std::make_shared<AuditReportCmd>();
  report->add_option("--input", po->inputs, "audit_faces.jsonl (repeatable, one per shard)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::ExistingFile);
  report->add_flag("--yates", po->yates, "Continuity correction for 2x2 chi-square tables");
  report->add_option("--out", po->out, "Output directory")->required();
  report->callback([po, &ctx] { ctx.run = [po, &ctx] { run_report(*po, ctx); }; });

  auto* annotate = app.add_subcommand("annotate", "Human annotation service");
  annotate->require_subcommand(1);
  auto* serve = annotate->add_subcommand("serve", "Serve the review queue over HTTP");
  auto so = std::make_shared<ServeCmd>();
  serve->add_option("--manifest", so->manifest, "Image manifest")->required()->check(CLI::ExistingFile);
  serve->add_option("--regions", so->regions, "Manipulation regions")
      ->required()
      ->check(CLI::ExistingFile);
  serve->add_option("--faces", so->faces, "Face sidecar (for hints)")->check(CLI::ExistingFile);
  serve->add_option("--data", so->data, "Journal directory")->envname("FACEGATE_ANNOT_DATA");
  serve->add_option("--host", so->host, "Bind address");
  serve->add_option("--port", so->port, "Port (0: any free port)")
      ->envname("FACEGATE_ANNOT_PORT")
      ->check(CLI::Range(0, 65535));
  serve->add_option("--n-annotators", so->n_annotators, "Codings per task")
      ->check(CLI::PositiveNumber);
  serve->add_option("--iou", so->iou, "Face-to-region IoU for hints")->check(CLI::Range(0.0, 1.0));
  serve->add_option("--hints", so->hints, "Predictions to attach as hints")->check(CLI::ExistingFile);
  serve->add_option("--out", so->out, "Stamp directory (default: --data)");
  serve->callback([so, &ctx] { ctx.run = [so, &ctx] { run_serve(*so, ctx); }; });
}

}  // namespace facegate::cli
