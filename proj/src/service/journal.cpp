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

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "facegate/annotation_service.hpp"
#include "facegate/error.hpp"
#include "facegate/jsonl.hpp"

namespace facegate::service {

namespace {

[[noreturn]] void io_fail(const std::string& what, const std::filesystem::path& path) {
  throw Error(ErrorCode::kIoError, what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& bytes, const std::filesystem::path& path) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("cannot append to", path);
    }
    done += static_cast<std::size_t>(n);
  }
}

void fsync_dir(const std::filesystem::path& dir) {
  const int d = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (d >= 0) {
    ::fsync(d);
    ::close(d);
  }
}

Json hint_json(const std::string& task_id, const Hint& h) {
  return Json{{"task_id", task_id},
              {"face_id", h.face_id},
              {"label", std::string(classifier::to_string(h.label))},
              {"bystander_probability", h.bystander_probability}};
}

}  // namespace

void apply(Journal::State& state, const Json& line) {
  const std::string kind = line.value("kind", std::string("annotation"));
  if (kind == "annotation") {
    std::vector<std::string> errors;
    auto r = audit::record_from_json(line, errors);
    if (!r) throw Error(ErrorCode::kFormatError, "journal holds an invalid annotation record");
    state.annotations.upsert(std::move(*r));
  } else if (kind == "reopen") {
    state.annotations.reopen(line.at("task_id").get<std::string>());
  } else if (kind == "hints") {
    for (const auto& h : line.at("hints")) {
      Hint hint;
      hint.face_id = h.at("face_id").get<std::string>();
      hint.label = classifier::parse_label(h.at("label").get<std::string>());
      hint.bystander_probability = h.at("bystander_probability").get<double>();
      state.hints[h.at("task_id").get<std::string>()][hint.face_id] = hint;
    }
  } else {
    throw Error(ErrorCode::kFormatError, "journal line has unknown kind '" + kind + "'");
  }
}

Journal::Journal(std::filesystem::path path) : path_(std::move(path)) {}

Journal::~Journal() {
  if (fd_ >= 0) ::close(fd_);
}

Journal::State Journal::open() {
  State state;
  if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
  if (!std::filesystem::exists(path_)) {
    const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
    if (fd < 0) io_fail("cannot create", path_);
    write_all(fd, jsonl::header(audit::kAnnotationsSchema, 1).dump() + "\n", path_);
    ::fsync(fd);
    ::close(fd);
    fsync_dir(path_.parent_path());
  }

  std::string bytes;
  {
    std::ifstream in(path_, std::ios::binary);
    if (!in) io_fail("cannot read", path_);
    std::ostringstream ss;
    ss << in.rdbuf();
    bytes = ss.str();
  }
  std::size_t pos = 0, line_no = 0;
  while (pos < bytes.size()) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) {
      // Unterminated final line: the write never completed, so it was never
      // acknowledged. Drop it.
      if (::truncate(path_.c_str(), static_cast<off_t>(pos)) != 0) io_fail("cannot repair", path_);
      state.dropped_torn_tail = true;
      break;
    }
    ++line_no;
    const std::string_view text(bytes.data() + pos, nl - pos);
    pos = nl + 1;
    if (text.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kFormatError, jsonl::location(path_.string(), line_no) +
                                               ": corrupt journal line: " + e.what());
    }
    if (j.contains("schema")) {
      if (j["schema"] != audit::kAnnotationsSchema || j.value("version", 1) > 1) {
        throw Error(ErrorCode::kFormatError,
                    jsonl::location(path_.string(), line_no) + ": not an annotation journal");
      }
      continue;
    }
    service::apply(state, j);
    ++state.lines;
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND);
  if (fd_ < 0) io_fail("cannot open", path_);
  return state;
}

void Journal::append(const Json& line) {
  if (fd_ < 0) throw Error(ErrorCode::kIoError, "journal is not open");
  struct stat st {};
  if (::fstat(fd_, &st) != 0) io_fail("cannot stat", path_);
  const off_t before = st.st_size;
  try {
    write_all(fd_, line.dump() + "\n", path_);
    if (::fsync(fd_) != 0) io_fail("cannot sync", path_);
  } catch (...) {
    // Leave no partial record behind.
    if (::ftruncate(fd_, before) == 0) ::fsync(fd_);
    throw;
  }
}

void Journal::compact(const State& state) {
  const std::filesystem::path tmp = path_.string() + ".tmp";
  std::string out = jsonl::header(audit::kAnnotationsSchema, 1).dump() + "\n";
  for (const auto& [task, by_annotator] : state.annotations.tasks) {
    for (const auto& [annotator, record] : by_annotator) {
      Json j = audit::to_json(record);
      j["kind"] = "annotation";
      out += j.dump() + "\n";
    }
  }
  for (const auto& [task, by_face] : state.hints) {
    Json hints = Json::array();
    for (const auto& [face, h] : by_face) hints.push_back(hint_json(task, h));
    out += Json{{"kind", "hints"}, {"hints", hints}}.dump() + "\n";
  }
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) io_fail("cannot create", tmp);
  try {
    write_all(fd, out, tmp);
    if (::fsync(fd) != 0) io_fail("cannot sync", tmp);
  } catch (...) {
    ::close(fd);
    std::filesystem::remove(tmp);
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path_.c_str()) != 0) io_fail("cannot replace", path_);
  fsync_dir(path_.parent_path());
  if (fd_ >= 0) ::close(fd_);
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND);
  if (fd_ < 0) io_fail("cannot open", path_);
}

}  // namespace facegate::service
