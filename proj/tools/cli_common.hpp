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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facegate/error.hpp"
#include "facegate/evaluation.hpp"

namespace facegate::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

struct Context {
  std::uint64_t seed = 0;
  int jobs = 0;           // 0: OpenMP default
  std::string command;    // "evaluate kfold", ...
  Json config;            // effective option values, filled after parsing
  std::function<void()> run;
};

// Subcommand registration; each sets ctx.run from its parse callback.
void register_corpus_commands(CLI::App& app, Context& ctx);
void register_model_commands(CLI::App& app, Context& ctx);
void register_audit_commands(CLI::App& app, Context& ctx);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const;
  std::string text() const;  // aligned columns
};

// <dir>/<stem>.csv and <dir>/<stem>.txt
void write_table(const fs::path& dir, const std::string& stem, const Table& table);
void write_file(const fs::path& path, const std::string& content);
void write_jsonl(const fs::path& path, const std::vector<Json>& lines);
// seed, effective config, its hash and the tool version. No timestamps.
void write_stamp(const fs::path& dir, const Context& ctx);

std::string fmt(std::optional<double> v);  // 4 decimals or "undefined"
Json to_json(std::optional<double> v);
Json to_json(const evaluation::ConfusionMatrix& cm);
Json to_json(const evaluation::MetricsReport& m);

// {"warning": msg} on stderr.
void warn(const std::string& message);

int exit_code_for(ErrorCode code);

// Throws kConfigError unless the file exists.
void require_file(const fs::path& path, const std::string& option);

}  // namespace facegate::cli
