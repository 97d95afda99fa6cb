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

#include "cli_common.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "facegate/seed.hpp"

namespace facegate::cli {

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string Table::csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string Table::text() const {
  std::vector<std::size_t> width(header.size(), 0);
  auto measure = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], cells[i].size());
    }
  };
  measure(header);
  for (const auto& r : rows) measure(r);
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      if (i == 0) {
        out += c + std::string(width[i] - c.size(), ' ');
      } else {
        out += "  " + std::string(width[i] - c.size(), ' ') + c;
      }
    }
    out += '\n';
  };
  line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w + 2;
  out += std::string(total > 2 ? total - 2 : 0, '-') + "\n";
  for (const auto& r : rows) line(r);
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

void write_table(const fs::path& dir, const std::string& stem, const Table& table) {
  write_file(dir / (stem + ".csv"), table.csv());
  write_file(dir / (stem + ".txt"), table.text());
}

void write_jsonl(const fs::path& path, const std::vector<Json>& lines) {
  std::string out;
  for (const auto& j : lines) out += j.dump() + "\n";
  write_file(path, out);
}

void write_stamp(const fs::path& dir, const Context& ctx) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(ctx.config.dump())));
  const Json stamp{{"command", ctx.command},
                   {"seed", ctx.seed},
                   {"config", ctx.config},
                   {"config_hash", hash},
                   {"version", kVersion}};
  write_file(dir / "stamp.json", stamp.dump(2) + "\n");
}

std::string fmt(std::optional<double> v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

Json to_json(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

Json to_json(const evaluation::ConfusionMatrix& cm) {
  return Json{{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

Json to_json(const evaluation::MetricsReport& m) {
  return Json{{"accuracy", to_json(m.accuracy)},
              {"precision", to_json(m.precision)},
              {"recall_tpr", to_json(m.recall_tpr)},
              {"f1", to_json(m.f1)},
              {"fpr", to_json(m.fpr)}};
}

void warn(const std::string& message) { std::cerr << Json{{"warning", message}}.dump() << '\n'; }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kInvalidK:
      return 2;
    case ErrorCode::kDivergence:
      return 4;
    default:
      return 3;
  }
}

void require_file(const fs::path& path, const std::string& option) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::kConfigError, option + ": no such file '" + path.string() + "'");
  }
}

}  // namespace facegate::cli
