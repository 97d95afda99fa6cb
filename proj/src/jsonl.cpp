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

#include "facegate/jsonl.hpp"

#include <fstream>

#include "facegate/error.hpp"

namespace facegate::jsonl {

std::string location(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

void for_each_record(std::istream& in, std::string_view source, std::string_view schema,
                     int max_version,
                     const std::function<void(const Json&, std::size_t)>& visit) {
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kFormatError, location(source, line_no) + ": " + e.what());
    }
    if (!record.is_object()) {
      throw Error(ErrorCode::kFormatError,
                  location(source, line_no) + ": record is not a JSON object");
    }
    if (first && record.contains("schema")) {
      first = false;
      const auto& s = record["schema"];
      if (!s.is_string() || s.get<std::string>() != schema) {
        throw Error(ErrorCode::kFormatError, location(source, line_no) + ": expected schema '" +
                                                 std::string(schema) + "'");
      }
      const int version = record.value("version", 1);
      if (version > max_version) {
        throw Error(ErrorCode::kUnsupportedVersion,
                    location(source, line_no) + ": schema version " + std::to_string(version) +
                        " is newer than supported " + std::to_string(max_version));
      }
      continue;
    }
    first = false;
    visit(record, line_no);
  }
}

void for_each_record(const std::filesystem::path& path, std::string_view schema, int max_version,
                     const std::function<void(const Json&, std::size_t)>& visit) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  for_each_record(in, path.string(), schema, max_version, visit);
}

Json header(std::string_view schema, int version) {
  return Json{{"schema", schema}, {"version", version}};
}

const Json& require(const Json& record, std::string_view field, std::string_view where) {
  const auto it = record.find(field);
  if (it == record.end() || it->is_null()) {
    throw Error(ErrorCode::kFormatError,
                std::string(where) + ": missing field '" + std::string(field) + "'");
  }
  return *it;
}

std::string require_string(const Json& record, std::string_view field, std::string_view where) {
  const Json& v = require(record, field, where);
  if (!v.is_string()) {
    throw Error(ErrorCode::kFormatError,
                std::string(where) + ": field '" + std::string(field) + "' must be a string");
  }
  return v.get<std::string>();
}

double require_number(const Json& record, std::string_view field, std::string_view where) {
  const Json& v = require(record, field, where);
  if (!v.is_number()) {
    throw Error(ErrorCode::kFormatError,
                std::string(where) + ": field '" + std::string(field) + "' must be a number");
  }
  return v.get<double>();
}

int require_int(const Json& record, std::string_view field, std::string_view where) {
  const Json& v = require(record, field, where);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kFormatError,
                std::string(where) + ": field '" + std::string(field) + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace facegate::jsonl
