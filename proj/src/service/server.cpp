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

#include <fstream>
#include <sstream>

#include <httplib.h>

#include "facegate/annotation_service.hpp"
#include "facegate/error.hpp"

namespace facegate::service {

namespace {

Json box_json(const imaging::RectRegion& r) { return Json::array({r.x, r.y, r.w, r.h}); }

Json task_json(const ReviewTask& t) {
  Json hints = Json::array();
  for (const auto& h : t.hints) {
    hints.push_back(Json{{"face_id", h.face_id},
                         {"label", std::string(classifier::to_string(h.label))},
                         {"bystander_probability", h.bystander_probability}});
  }
  return Json{{"task_id", t.task_id},
              {"image_id", t.image_id},
              {"region_id", t.region_id},
              {"region", box_json(t.region)},
              {"region_type", t.region_type},
              {"status", std::string(to_string(t.status))},
              {"annotator_ids", t.annotator_ids},
              {"hints", hints}};
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const std::vector<std::string>& fields = {}) {
  Json err{{"code", code}, {"message", message}};
  if (!fields.empty()) err["fields"] = fields;
  send_json(res, status, Json{{"error", err}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDanglingReference: return 404;
    case ErrorCode::kValidationError: return 422;
    case ErrorCode::kFormatError: return 400;
    case ErrorCode::kIoError: return 503;
    default: return 500;
  }
}

// "... fields: a b c" -> {a, b, c}
std::vector<std::string> fields_of(const std::string& message) {
  std::vector<std::string> out;
  const auto at = message.find("fields:");
  if (at == std::string::npos) return out;
  std::istringstream in(message.substr(at + 7));
  for (std::string f; in >> f;) out.push_back(f);
  return out;
}

template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    send_error(res, status_for(e.code()), to_string(e.code()), e.what(), fields_of(e.what()));
  } catch (const Json::exception& e) {
    send_error(res, 400, "FormatError", std::string("malformed request body: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "InternalError", e.what());
  }
}

std::string content_type_for(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".bmp") return "image/bmp";
  return "application/octet-stream";
}

}  // namespace

struct AnnotationServer::Impl {
  std::shared_ptr<TaskBoard> board;
  httplib::Server http;
  std::atomic<bool> serving{false};

  explicit Impl(std::shared_ptr<TaskBoard> b) : board(std::move(b)) { routes(); }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Expose-Headers", "X-Facegate-Overlay"}});
    http.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    http.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200,
                Json{{"status", "ok"},
                     {"tasks", board->tasks().size()},
                     {"n_annotators", board->n_annotators()}});
    });

    http.Get("/v1/tasks", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::optional<TaskStatus> filter;
        if (req.has_param("status")) {
          filter = parse_status(req.get_param_value("status"));
          if (!filter) {
            send_error(res, 422, "ValidationError", "unknown status filter", {"status"});
            return;
          }
        }
        Json out = Json::array();
        for (const auto& t : board->tasks(filter)) out.push_back(task_json(t));
        send_json(res, 200, Json{{"tasks", out}});
      });
    });

    http.Get(R"(/v1/tasks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto t = board->task(id);
        if (!t) throw Error(ErrorCode::kDanglingReference, "unknown task '" + id + "'");
        Json j = task_json(*t);
        Json rs = Json::array();
        for (const auto& r : board->records(id)) rs.push_back(audit::to_json(r));
        j["records"] = rs;
        send_json(res, 200, j);
      });
    });

    http.Get(R"(/v1/tasks/([^/]+)/consensus)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const std::string id = req.matches[1];
                 const auto t = board->task(id);
                 if (!t) throw Error(ErrorCode::kDanglingReference, "unknown task '" + id + "'");
                 Json j{{"task_id", id}, {"status", std::string(to_string(t->status))}};
                 const auto c = board->consensus(id);
                 if (!c) {
                   j["consensus"] = nullptr;
                 } else {
                   Json cj{{"coding", audit::to_json(c->coding)},
                           {"escalated", c->escalated},
                           {"unresolved", c->unresolved},
                           {"records", c->records}};
                   cj["label"] = c->label ? Json(std::string(classifier::to_string(*c->label)))
                                          : Json(nullptr);
                   j["consensus"] = cj;
                 }
                 send_json(res, 200, j);
               });
             });

    http.Post(R"(/v1/tasks/([^/]+)/annotations)",
              [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] { submit(req, res); });
              });

    http.Post(R"(/v1/tasks/([^/]+)/reopen)",
              [this](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const std::string id = req.matches[1];
                  if (!board->task(id)) {
                    throw Error(ErrorCode::kDanglingReference, "unknown task '" + id + "'");
                  }
                  try {
                    send_json(res, 200, task_json(board->reopen(id)));
                  } catch (const Error& e) {
                    if (e.code() != ErrorCode::kValidationError) throw;
                    send_error(res, 409, "Conflict", e.what());
                  }
                });
              });

    http.Get(R"(/v1/images/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto& manifest = board->manifest();
        const auto& entry = manifest.at(id);
        const auto path = manifest.resolve(entry);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::kIoError, "cannot read image " + path.string());
        std::ostringstream bytes;
        bytes << in.rdbuf();
        res.set_header("X-Facegate-Overlay", board->overlay(id).dump());
        res.status = 200;
        res.set_content(bytes.str(), content_type_for(path));
      });
    });

    http.Get(R"(/v1/images/([^/]+)/overlay)",
             [this](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, 200, board->overlay(req.matches[1])); });
             });

    http.Get("/v1/agreement", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, board->agreement()); });
    });

    http.Get("/v1/export", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        res.status = 200;
        res.set_content(board->export_jsonl(), "application/x-ndjson");
      });
    });

    http.Post("/v1/hints", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const Json body = Json::parse(req.body);
        if (!body.is_object() || !body.contains("predictions") || !body["predictions"].is_array()) {
          send_error(res, 422, "ValidationError", "expected a predictions array", {"predictions"});
          return;
        }
        std::vector<std::pair<std::string, Hint>> preds;
        std::size_t i = 0;
        for (const auto& p : body["predictions"]) {
          std::vector<std::string> bad;
          const std::string at = "predictions[" + std::to_string(i++) + "].";
          if (!p.is_object()) {
            send_error(res, 422, "ValidationError", "prediction is not an object", {at});
            return;
          }
          if (!p.contains("image_id") || !p["image_id"].is_string()) bad.push_back(at + "image_id");
          if (!p.contains("face_id") || !p["face_id"].is_string()) bad.push_back(at + "face_id");
          const bool has_label = p.contains("label") && p["label"].is_string() &&
                                 (p["label"] == "subject" || p["label"] == "bystander");
          if (!has_label) bad.push_back(at + "label");
          const bool has_prob = p.contains("bystander_probability") &&
                                p["bystander_probability"].is_number() &&
                                p["bystander_probability"].get<double>() >= 0.0 &&
                                p["bystander_probability"].get<double>() <= 1.0;
          if (!has_prob) bad.push_back(at + "bystander_probability");
          if (!bad.empty()) {
            send_error(res, 422, "ValidationError", "invalid prediction", bad);
            return;
          }
          Hint h;
          h.face_id = p["face_id"].get<std::string>();
          h.label = classifier::parse_label(p["label"].get<std::string>());
          h.bystander_probability = p["bystander_probability"].get<double>();
          preds.emplace_back(p["image_id"].get<std::string>(), h);
        }
        const std::size_t touched = board->import_predictions(preds);
        send_json(res, 200, Json{{"predictions", preds.size()}, {"tasks_touched", touched}});
      });
    });
  }

  void submit(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto t = board->task(id);
    if (!t) throw Error(ErrorCode::kDanglingReference, "unknown task '" + id + "'");
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      send_error(res, 400, "FormatError", std::string("body is not JSON: ") + e.what());
      return;
    }
    if (!body.is_object()) {
      send_error(res, 422, "ValidationError", "body must be an object", {"body"});
      return;
    }
    if (!body.contains("image_id")) body["image_id"] = t->image_id;
    if (!body.contains("region_id")) body["region_id"] = t->region_id;
    std::vector<std::string> errors;
    auto record = audit::record_from_json(body, errors);
    if (!record) {
      send_error(res, 422, "ValidationError", "invalid annotation record", errors);
      return;
    }
    send_json(res, 201, task_json(board->submit(id, std::move(*record))));
  }
};

AnnotationServer::AnnotationServer(std::shared_ptr<TaskBoard> board)
    : impl_(std::make_unique<Impl>(std::move(board))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const ServerConfig& config) {
  if (config.port == 0) {
    port_ = impl_->http.bind_to_any_port(config.host);
  } else {
    port_ = impl_->http.bind_to_port(config.host, config.port) ? config.port : -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::kIoError,
                "cannot bind " + config.host + ":" + std::to_string(config.port));
  }
  return port_;
}

bool AnnotationServer::serve() {
  impl_->serving = true;
  const bool ok = impl_->http.listen_after_bind();
  impl_->serving = false;
  return ok;
}

bool AnnotationServer::listen(const ServerConfig& config) {
  bind(config);
  return serve();
}

void AnnotationServer::stop() {
  if (impl_) impl_->http.stop();
}

bool AnnotationServer::running() const { return impl_->http.is_running(); }

}  // namespace facegate::service
