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

#include <filesystem>
#include <functional>
#include <istream>
#include <string>
#include <string_view>

#include <json.hpp>

namespace facegate::jsonl {

using Json = nlohmann::json;

// Every line-delimited file may start with a header record
// {"schema": "<name>", "version": N}. Blank lines are ignored.
struct Header {
  std::string schema;
  int version = 1;
};

// Calls visit(record, line_number) for each data record. Parse failures and
// schema/version mismatches throw kFormatError / kUnsupportedVersion with
// "<source>:<line>" in the message.
void for_each_record(std::istream& in, std::string_view source, std::string_view schema,
                     int max_version,
                     const std::function<void(const Json&, std::size_t)>& visit);

void for_each_record(const std::filesystem::path& path, std::string_view schema, int max_version,
                     const std::function<void(const Json&, std::size_t)>& visit);

Json header(std::string_view schema, int version);

// Field accessors that raise kFormatError naming the field and location.
const Json& require(const Json& record, std::string_view field, std::string_view where);
std::string require_string(const Json& record, std::string_view field, std::string_view where);
double require_number(const Json& record, std::string_view field, std::string_view where);
int require_int(const Json& record, std::string_view field, std::string_view where);

std::string location(std::string_view source, std::size_t line);

}  // namespace facegate::jsonl
