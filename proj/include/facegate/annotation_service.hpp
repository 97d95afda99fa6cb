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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "facegate/audit.hpp"
#include "facegate/evaluation.hpp"
#include "facegate/providers.hpp"

namespace facegate::service {

using Json = nlohmann::json;
using audit::AnnotationRecord;
using audit::AnnotationSet;

enum class TaskStatus { kPending, kPartiallyCoded, kResolved, kEscalated };

std::string_view to_string(TaskStatus s);
std::optional<TaskStatus> parse_status(std::string_view text);

// A machine-generated suggestion shown next to a task; never resolves it.
struct Hint {
  std::string face_id;
  classifier::Label label = classifier::Label::kSubject;
  double bystander_probability = 0.0;
};

struct ReviewTask {
  std::string task_id;  // "<image_id>:<region_id>"
  std::string image_id;
  std::string region_id;
  imaging::RectRegion region;
  int region_type = 4;
  TaskStatus status = TaskStatus::kPending;
  std::vector<std::string> annotator_ids;
  std::vector<Hint> hints;
};

// Append-only JSONL journal. Each append is flushed and fsync'd before it
// returns; a torn final line (crash mid-write) is dropped when the journal is
// opened.
class Journal {
 public:
  struct State {
    AnnotationSet annotations;
    std::map<std::string, std::map<std::string, Hint>> hints;  // task -> face -> hint
    std::size_t lines = 0;
    bool dropped_torn_tail = false;
  };

  explicit Journal(std::filesystem::path path);
  ~Journal();
  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  // Reads the journal (repairing a torn tail) and opens it for appending.
  State open();
  // Throws kIoError; on failure the file is restored to its previous length.
  void append(const Json& line);
  // Rewrites the journal as the minimal equivalent sequence of lines.
  void compact(const State& state);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

void apply(Journal::State& state, const Json& line);  // replays one journal line

struct BoardConfig {
  std::size_t n_annotators = 3;
  double iou_threshold = 0.5;
};

// Task board over a manifest, its manipulation regions and face sidecars.
// Writers are serialized; readers work on immutable snapshots.
class TaskBoard {
 public:
  TaskBoard(providers::Manifest manifest, std::vector<providers::ManipulationRegion> regions,
            std::vector<providers::FaceSidecar> faces, std::unique_ptr<Journal> journal,
            BoardConfig config = {});

  std::vector<ReviewTask> tasks(std::optional<TaskStatus> filter = std::nullopt) const;
  std::optional<ReviewTask> task(const std::string& task_id) const;

  // Throws kDanglingReference (unknown task), kValidationError (record does not
  // belong to the task) and kIoError (journal write failed).
  ReviewTask submit(const std::string& task_id, AnnotationRecord record);
  // escalated -> pending; the task's records are discarded. Throws
  // kDanglingReference and kValidationError (task not escalated).
  ReviewTask reopen(const std::string& task_id);
  // Attaches predictions to the tasks whose region covers the face. Throws
  // kDanglingReference for an unknown (image, face). Returns tasks touched.
  std::size_t import_predictions(const std::vector<std::pair<std::string, Hint>>& predictions);

  std::vector<AnnotationRecord> records(const std::string& task_id) const;
  std::optional<audit::ConsensusResult> consensus(const std::string& task_id) const;
  Json agreement() const;
  std::string export_jsonl() const;
  Json overlay(const std::string& image_id) const;

  const providers::Manifest& manifest() const { return manifest_; }
  std::size_t n_annotators() const { return config_.n_annotators; }
  void compact();

 private:
  struct TaskDef {
    std::string image_id;
    std::string region_id;
    imaging::RectRegion region;
    int region_type;
  };
  using Snapshot = std::shared_ptr<const Journal::State>;

  Snapshot snapshot() const;
  ReviewTask describe(const std::string& task_id, const TaskDef& def, const Journal::State& s) const;
  const TaskDef& require_task(const std::string& task_id) const;

  providers::Manifest manifest_;
  std::map<std::string, TaskDef> defs_;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> tasks_of_face_;
  std::map<std::string, std::vector<providers::FaceObservation>> faces_;
  std::unique_ptr<Journal> journal_;
  BoardConfig config_;

  std::mutex write_mutex_;
  mutable std::mutex snapshot_mutex_;  // guards only the pointer swap
  Snapshot state_;
};

// Cohen's kappa per annotator pair and Fleiss' kappa, per coding field, over
// tasks with a complete set of codings. Set-valued fields compare as whole
// sets.
Json agreement_report(const std::vector<std::vector<AnnotationRecord>>& completed);

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
};

class AnnotationServer {
 public:
  explicit AnnotationServer(std::shared_ptr<TaskBoard> board);
  ~AnnotationServer();

  // Blocks until stop(). port 0 binds an ephemeral port, reported by port().
  bool listen(const ServerConfig& config);
  // Binds and returns the port without serving; call serve() afterwards.
  int bind(const ServerConfig& config);
  bool serve();
  void stop();
  bool running() const;
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace facegate::service
