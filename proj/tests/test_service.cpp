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

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "facegate/annotation_service.hpp"
#include "facegate/error.hpp"
#include "facegate/image_io.hpp"
#include "facegate/jsonl.hpp"
#include "support.hpp"

namespace facegate::service {
namespace {

using facegate::testing::TempDir;
using facegate::testing::slurp;
using facegate::testing::spit;

Json coding(const std::string& intention, std::vector<std::string> parts = {"eye"},
            std::vector<std::string> methods = {"blur"}) {
  return {{"face_verification", "contains_face"},
          {"manipulation_verification", "manipulated"},
          {"intentions", {intention}},
          {"parts", parts},
          {"methods", methods}};
}

Json body(const std::string& annotator, const Json& c) {
  return {{"annotator_id", annotator}, {"coding", c}, {"timestamp", "t"}};
}

// Two images: "a" has a facial region r1 over face f1 and an unrelated type 4
// region r2; "b" has one type 3 region.
struct Corpus {
  TempDir dir{"svc"};

  Corpus() {
    imaging::write_png(dir / "a.png", imaging::GrayImage(64, 48, std::uint8_t{90}));
    spit(dir / "manifest.jsonl",
         R"({"schema":"facegate.manifest","version":1}
{"image_id":"a","path":"a.png","width":64,"height":48,"uploader_id":"u"}
{"image_id":"b","path":"missing.png","width":64,"height":48,"uploader_id":"u"}
)");
    spit(dir / "regions.jsonl",
         R"({"image_id":"a","region_id":"r1","region_type":2,"box":[10,10,20,20]}
{"image_id":"a","region_id":"r2","region_type":4,"box":[40,5,10,10]}
{"image_id":"b","region_id":"r1","region_type":3,"box":[0,0,30,30]}
)");
    spit(dir / "faces.jsonl",
         R"({"image_id":"a","faces":[{"face_id":"f1","box":[11,10,20,20]},{"face_id":"f2","box":[50,30,8,8]}]}
)");
  }

  std::shared_ptr<TaskBoard> board(const std::string& journal = "journal.jsonl", std::size_t n = 3) const {
    auto manifest = providers::load_manifest(dir / "manifest.jsonl");
    auto regions = providers::load_manipulation_regions(dir / "regions.jsonl", manifest);
    auto faces = providers::load_face_sidecar(dir / "faces.jsonl", manifest);
    return std::make_shared<TaskBoard>(std::move(manifest), std::move(regions), std::move(faces),
                                       std::make_unique<Journal>(dir / journal), BoardConfig{n, 0.5});
  }
};

AnnotationRecord rec(const std::string& annotator, const Json& c) {
  std::vector<std::string> errors;
  auto r = audit::record_from_json(
      Json{{"image_id", "a"}, {"region_id", "r1"}, {"annotator_id", annotator}, {"coding", c}}, errors);
  EXPECT_TRUE(errors.empty());
  return *r;
}

// ---------------------------------------------------------------------------
// Board

TEST(Board, StatusLifecycle) {
  Corpus c;
  auto board = c.board();
  EXPECT_EQ(board->tasks().size(), 3u);
  EXPECT_EQ(board->task("a:r1")->status, TaskStatus::kPending);
  board->submit("a:r1", rec("x", coding("privacy")));
  EXPECT_EQ(board->task("a:r1")->status, TaskStatus::kPartiallyCoded);
  board->submit("a:r1", rec("y", coding("privacy")));
  board->submit("a:r1", rec("z", coding("humor")));
  EXPECT_EQ(board->task("a:r1")->status, TaskStatus::kResolved);
  EXPECT_EQ(board->tasks(TaskStatus::kResolved).size(), 1u);
  // Resubmission by the same annotator supersedes the earlier record.
  board->submit("a:r1", rec("x", coding("beauty")));
  EXPECT_EQ(board->records("a:r1").size(), 3u);
  EXPECT_EQ(board->task("a:r1")->status, TaskStatus::kEscalated);
  EXPECT_EQ(board->consensus("a:r1")->coding.intentions, std::set<audit::Intention>{audit::Intention::kUnknown});
  board->reopen("a:r1");
  EXPECT_EQ(board->task("a:r1")->status, TaskStatus::kPending);
  EXPECT_TRUE(board->records("a:r1").empty());
  EXPECT_FALSE(board->consensus("a:r1").has_value());
}

TEST(Board, RejectsForeignAndInvalidRecords) {
  Corpus c;
  auto board = c.board();
  auto r = rec("x", coding("privacy"));
  r.region_id = "r2";
  EXPECT_THROW(board->submit("a:r1", r), Error);
  auto bad = rec("x", coding("privacy"));
  bad.coding.intentions.clear();
  try {
    board->submit("a:r1", bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidationError);
    EXPECT_NE(std::string(e.what()).find("intentions"), std::string::npos);
  }
  try {
    board->submit("zz:r1", rec("x", coding("privacy")));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDanglingReference);
  }
  try {
    board->reopen("a:r1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidationError);
  }
  EXPECT_TRUE(board->records("a:r1").empty());
}

TEST(Board, RestartReplaysJournal) {
  Corpus c;
  {
    auto board = c.board();
    board->submit("a:r1", rec("x", coding("privacy")));
    board->submit("a:r1", rec("y", coding("humor")));
    board->submit("a:r1", rec("z", coding("beauty")));
    board->reopen("a:r1");
    board->submit("a:r1", rec("x", coding("privacy")));
  }
  auto again = c.board();
  ASSERT_EQ(again->records("a:r1").size(), 1u);
  EXPECT_EQ(again->records("a:r1")[0].annotator_id, "x");
  const std::string before = again->export_jsonl();
  again->compact();
  EXPECT_EQ(c.board()->export_jsonl(), before);
}

TEST(Board, TornTailIsDropped) {
  Corpus c;
  {
    auto board = c.board();
    board->submit("a:r1", rec("x", coding("privacy")));
    board->submit("a:r1", rec("y", coding("privacy")));
  }
  const auto path = c.dir / "journal.jsonl";
  const auto full = slurp(path);
  spit(path, full + R"({"kind":"annotation","image_id":"a","region_id":"r1","annot)");
  Journal j(path);
  const auto state = j.open();
  EXPECT_TRUE(state.dropped_torn_tail);
  EXPECT_EQ(state.annotations.records_for("a:r1").size(), 2u);
  EXPECT_EQ(slurp(path), full);  // repaired on open
}

TEST(Board, HintsAttachByLinkAndAreIdempotent) {
  Corpus c;
  auto board = c.board();
  const std::vector<std::pair<std::string, Hint>> preds = {{"a", {"f1", classifier::Label::kBystander, 0.8}},
                                                           {"a", {"f2", classifier::Label::kSubject, 0.1}}};
  EXPECT_EQ(board->import_predictions(preds), 1u);  // f2 overlaps no region
  EXPECT_EQ(board->import_predictions(preds), 1u);
  const auto t = board->task("a:r1");
  ASSERT_EQ(t->hints.size(), 1u);
  EXPECT_EQ(t->hints[0].face_id, "f1");
  EXPECT_DOUBLE_EQ(t->hints[0].bystander_probability, 0.8);
  EXPECT_EQ(t->status, TaskStatus::kPending);  // hints never resolve a task
  EXPECT_TRUE(board->task("a:r2")->hints.empty());
  try {
    board->import_predictions({{"a", {"nope", classifier::Label::kSubject, 0.1}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDanglingReference);
  }
  EXPECT_EQ(c.board()->task("a:r1")->hints.size(), 1u);  // persisted
}

TEST(Board, AgreementMatchesEvaluationModule) {
  Corpus c;
  auto board = c.board("j.jsonl", 2);
  board->submit("a:r1", rec("x", coding("privacy")));
  board->submit("a:r1", rec("y", coding("privacy")));
  auto r2x = rec("x", coding("privacy", {"eye"}, {"mask"}));
  r2x.region_id = "r2";
  auto r2y = rec("y", coding("humor", {"eye"}, {"mask"}));
  r2y.region_id = "r2";
  board->submit("a:r2", r2x);
  board->submit("a:r2", r2y);
  const auto report = board->agreement();
  EXPECT_EQ(report["tasks"], 2);
  const auto& in = report["fields"]["intentions"];
  const std::vector<std::string> a = {"privacy", "privacy"}, b = {"privacy", "humor"};
  const auto cohen = evaluation::cohen_kappa(a, b);
  ASSERT_EQ(in["cohen"].size(), 1u);
  EXPECT_DOUBLE_EQ(in["cohen"][0]["observed"].get<double>(), cohen.observed);
  EXPECT_EQ(in["cohen"][0]["kappa"].is_null(), !cohen.kappa.has_value());
  // Fleiss over the same two items: categories humor, privacy.
  const auto fleiss = evaluation::fleiss_kappa({{0, 2}, {1, 1}});
  EXPECT_DOUBLE_EQ(in["fleiss"]["observed"].get<double>(), fleiss.observed);
  EXPECT_DOUBLE_EQ(in["fleiss"]["kappa"].get<double>(), *fleiss.kappa);
}

TEST(Board, OverlayAndExport) {
  Corpus c;
  auto board = c.board();
  const auto o = board->overlay("a");
  EXPECT_EQ(o["width"], 64);
  EXPECT_EQ(o["regions"].size(), 2u);
  EXPECT_EQ(o["faces"].size(), 2u);
  EXPECT_EQ(o["regions"][0]["box"], Json({10, 10, 20, 20}));
  board->submit("a:r1", rec("x", coding("privacy")));
  std::istringstream lines(board->export_jsonl());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = Json::parse(line);
    if (j["task_id"] == "a:r1") {
      EXPECT_EQ(j["records"].size(), 1u);
    }
    ++n;
  }
  EXPECT_EQ(n, 1u);  // only tasks with records are exported
}

TEST(Board, ConcurrentWritersAllLand) {
  Corpus c;
  auto board = c.board("j.jsonl", 50);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        board->submit("a:r1", rec("w" + std::to_string(t) + "_" + std::to_string(i), coding("privacy")));
        board->tasks();
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(board->records("a:r1").size(), 40u);
  EXPECT_EQ(c.board("j.jsonl", 50)->records("a:r1").size(), 40u);
}

// ---------------------------------------------------------------------------
// HTTP

struct Running {
  std::shared_ptr<TaskBoard> board;
  AnnotationServer server;
  int port;
  std::thread thread;

  explicit Running(std::shared_ptr<TaskBoard> b)
      : board(b), server(b), port(server.bind({"127.0.0.1", 0})), thread([this] { server.serve(); }) {
    for (int i = 0; i < 200 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ~Running() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

TEST(Http, TaskFlow) {
  Corpus c;
  Running run(c.board());
  auto cli = run.client();
  auto health = cli.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");

  auto tasks = cli.Get("/v1/tasks?status=pending");
  ASSERT_TRUE(tasks);
  EXPECT_EQ(Json::parse(tasks->body)["tasks"].size(), 3u);
  EXPECT_EQ(cli.Get("/v1/tasks?status=bogus")->status, 422);

  for (const char* who : {"x", "y", "z"}) {
    auto res = cli.Post("/v1/tasks/a:r1/annotations", body(who, coding("privacy")).dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 201) << res->body;
  }
  auto one = Json::parse(cli.Get("/v1/tasks/a:r1")->body);
  EXPECT_EQ(one["status"], "resolved");
  EXPECT_EQ(one["records"].size(), 3u);
  auto cons = Json::parse(cli.Get("/v1/tasks/a:r1/consensus")->body);
  EXPECT_EQ(cons["consensus"]["coding"]["intentions"], Json({"privacy"}));
  EXPECT_EQ(cons["consensus"]["escalated"], false);
  EXPECT_TRUE(Json::parse(cli.Get("/v1/tasks/a:r2/consensus")->body)["consensus"].is_null());

  EXPECT_EQ(cli.Post("/v1/tasks/a:r1/reopen", "", "application/json")->status, 409);
  EXPECT_EQ(cli.Get("/v1/tasks/zz:r9")->status, 404);
  EXPECT_EQ(cli.Post("/v1/tasks/zz:r9/annotations", body("x", coding("privacy")).dump(), "application/json")->status,
            404);
  EXPECT_EQ(cli.Post("/v1/tasks/a:r1/annotations", "{nope", "application/json")->status, 400);

  auto invalid = cli.Post("/v1/tasks/a:r2/annotations", body("x", coding("unknown", {"tail"})).dump(),
                          "application/json");
  EXPECT_EQ(invalid->status, 422);
  const auto err = Json::parse(invalid->body)["error"];
  EXPECT_EQ(err["code"], "ValidationError");
  EXPECT_NE(std::find(err["fields"].begin(), err["fields"].end(), "coding.parts"), err["fields"].end());

  auto opts = cli.Options("/v1/tasks");
  ASSERT_TRUE(opts);
  EXPECT_EQ(opts->status, 204);
  EXPECT_NE(opts->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
}

TEST(Http, EscalationAndReopen) {
  Corpus c;
  Running run(c.board());
  auto cli = run.client();
  for (auto [who, in] : {std::pair{"x", "privacy"}, {"y", "humor"}, {"z", "beauty"}})
    ASSERT_EQ(cli.Post("/v1/tasks/a:r1/annotations", body(who, coding(in)).dump(), "application/json")->status, 201);
  auto cons = Json::parse(cli.Get("/v1/tasks/a:r1/consensus")->body);
  EXPECT_EQ(cons["status"], "escalated");
  EXPECT_EQ(cons["consensus"]["coding"]["intentions"], Json({"unknown"}));
  EXPECT_EQ(Json::parse(cli.Get("/v1/tasks?status=escalated")->body)["tasks"].size(), 1u);
  auto re = cli.Post("/v1/tasks/a:r1/reopen", "", "application/json");
  EXPECT_EQ(re->status, 200);
  EXPECT_EQ(Json::parse(re->body)["status"], "pending");
}

TEST(Http, ImagesOverlayHintsExportAgreement) {
  Corpus c;
  Running run(c.board());
  auto cli = run.client();
  auto img = cli.Get("/v1/images/a");
  ASSERT_TRUE(img);
  EXPECT_EQ(img->status, 200);
  EXPECT_EQ(img->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(img->body, slurp(c.dir / "a.png"));
  EXPECT_EQ(Json::parse(img->get_header_value("X-Facegate-Overlay"))["image_id"], "a");
  EXPECT_EQ(cli.Get("/v1/images/b")->status, 503);  // listed but unreadable
  EXPECT_EQ(cli.Get("/v1/images/q")->status, 404);
  EXPECT_EQ(Json::parse(cli.Get("/v1/images/a/overlay")->body)["regions"].size(), 2u);

  const Json preds = {{"predictions", {{{"image_id", "a"}, {"face_id", "f1"}, {"label", "bystander"},
                                       {"bystander_probability", 0.9}}}}};
  for (int i = 0; i < 2; ++i) {
    auto h = cli.Post("/v1/hints", preds.dump(), "application/json");
    ASSERT_EQ(h->status, 200) << h->body;
    EXPECT_EQ(Json::parse(h->body)["tasks_touched"], 1);
  }
  EXPECT_EQ(Json::parse(cli.Get("/v1/tasks/a:r1")->body)["hints"].size(), 1u);
  const Json bad = {{"predictions", {{{"image_id", "a"}, {"face_id", "f1"}, {"label", "cat"},
                                      {"bystander_probability", 3}}}}};
  auto hb = cli.Post("/v1/hints", bad.dump(), "application/json");
  EXPECT_EQ(hb->status, 422);
  EXPECT_EQ(Json::parse(hb->body)["error"]["fields"],
            Json({"predictions[0].label", "predictions[0].bystander_probability"}));

  auto exp = cli.Get("/v1/export");
  EXPECT_EQ(exp->get_header_value("Content-Type"), "application/x-ndjson");
  EXPECT_EQ(exp->body, run.board->export_jsonl());
  EXPECT_EQ(Json::parse(cli.Get("/v1/agreement")->body), run.board->agreement());
}

// A write failure must surface as 503 and leave nothing behind. The file size
// limit is applied in a child process so the test runner is unaffected.
TEST(Http, JournalWriteFailureIs503AndNotPersisted) {
  Corpus c;
  {
    auto board = c.board();
    board->submit("a:r1", rec("x", coding("privacy")));
  }
  const auto path = c.dir / "journal.jsonl";
  const auto before = slurp(path);

  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    int code = 0;
    {
      std::signal(SIGXFSZ, SIG_IGN);
      Running run(c.board());
      rlimit lim{static_cast<rlim_t>(before.size() + 16), static_cast<rlim_t>(before.size() + 16)};
      ::setrlimit(RLIMIT_FSIZE, &lim);
      auto cli = run.client();
      auto res = cli.Post("/v1/tasks/a:r1/annotations", body("y", coding("privacy")).dump(), "application/json");
      if (!res || res->status != 503) code = 1;
      else if (Json::parse(res->body)["error"]["code"] != "IoError") code = 2;
      else if (run.board->records("a:r1").size() != 1) code = 3;
    }
    ::_exit(code);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_EQ(slurp(path), before);
  EXPECT_EQ(c.board()->records("a:r1").size(), 1u);
}

TEST(Status, Names) {
  for (auto s : {TaskStatus::kPending, TaskStatus::kPartiallyCoded, TaskStatus::kResolved, TaskStatus::kEscalated})
    EXPECT_EQ(parse_status(to_string(s)), s);
  EXPECT_FALSE(parse_status("done").has_value());
}

}  // namespace
}  // namespace facegate::service
