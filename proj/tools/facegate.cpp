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

// facegate command-line entry point.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <omp.h>

#include "cli_common.hpp"

namespace {

using facegate::cli::Json;

void print_error(std::string_view code, const std::string& message, int exit_code) {
  std::cerr << Json{{"error", {{"code", code}, {"message", message}, {"exit_code", exit_code}}}}.dump()
            << '\n';
}

std::string config_value(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) {
      if (!out.empty()) out += ',';
      out += config_value(e);
    }
    return out;
  }
  return v.dump();
}

// Appends "--key=value" for every entry of the JSON config file so that, with
// take-last option semantics, the file overrides flags given on the command
// line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw facegate::Error(facegate::ErrorCode::kConfigError, "cannot read config " + path);
  Json cfg;
  try {
    cfg = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw facegate::Error(facegate::ErrorCode::kConfigError,
                          "config " + path + " is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) {
    throw facegate::Error(facegate::ErrorCode::kConfigError, "config " + path + " must be an object");
  }
  for (const auto& [key, value] : cfg.items()) args.push_back("--" + key + "=" + config_value(value));
  return args;
}

// Every option of the selected command chain except output locations.
Json effective_config(const CLI::App& app, std::string& command) {
  Json out = Json::object();
  const CLI::App* cur = &app;
  while (cur) {
    for (const CLI::Option* opt : cur->get_options()) {
      if (opt->get_lnames().empty()) continue;
      const std::string name = opt->get_lnames().front();
      if (name == "help" || name == "config" || name == "out" || name == "version" ||
          name == "jobs") continue;
      if (opt->count() > 0) {
        const auto& r = opt->results();
        if (opt->get_multi_option_policy() == CLI::MultiOptionPolicy::TakeAll) {
          out[name] = r;
        } else {
          out[name] = r.back();
        }
      } else {
        out[name] = opt->get_default_str();
      }
    }
    const auto subs = cur->get_subcommands();
    cur = subs.empty() ? nullptr : subs.front();
    if (cur) command += (command.empty() ? "" : " ") + cur->get_name();
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = facegate::cli;
  cli::Context ctx;

  CLI::App app{"Subject/bystander face classification and face privacy audits", "facegate"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kVersion);
  app.add_option("--seed", ctx.seed, "Run seed; every random choice derives from it");
  app.add_option("--jobs", ctx.jobs, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; its values override flags");

  cli::register_corpus_commands(app, ctx);
  cli::register_model_commands(app, ctx);
  cli::register_audit_commands(app, ctx);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("ConfigError", e.what(), 2);
    return 2;
  } catch (const facegate::Error& e) {
    const int code = cli::exit_code_for(e.code());
    print_error(to_string(e.code()), e.what(), code);
    return code;
  }

  ctx.config = effective_config(app, ctx.command);
  if (ctx.jobs > 0) omp_set_num_threads(ctx.jobs);
  try {
    if (!ctx.run) throw facegate::Error(facegate::ErrorCode::kConfigError, "no command given");
    ctx.run();
  } catch (const facegate::Error& e) {
    const int code = cli::exit_code_for(e.code());
    print_error(to_string(e.code()), e.what(), code);
    return code;
  } catch (const std::filesystem::filesystem_error& e) {
    print_error("IoError", e.what(), 3);
    return 3;
  } catch (const Json::exception& e) {
    print_error("FormatError", e.what(), 3);
    return 3;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what(), 3);
    return 3;
  }
  return 0;
}
