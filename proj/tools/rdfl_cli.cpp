/*
 * Copyright 2026 The rdfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end. Talks to the library only through rdfl.h.
//
//   rdfl <command> [--config FILE] [--seed N] [--out DIR] [--format csv|svg]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rdfl/rdfl.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int Report(rdfl_status status, const char* context) {
  std::fprintf(stderr, "rdfl: %s: %s (%s)\n", context, rdfl_last_error(),
               rdfl_status_string(status));
  return status == RDFL_ERR_CONFIG ? kExitConfig : kExitRuntime;
}

bool WriteFile(const std::filesystem::path& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

struct ConfigHandle {
  rdfl_config* ptr = nullptr;
  ~ConfigHandle() { rdfl_config_destroy(ptr); }
};

struct ReportHandle {
  rdfl_report* ptr = nullptr;
  ~ReportHandle() { rdfl_report_destroy(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quality-aware data market solver and federated training "
               "experiments"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(rdfl_version()));

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format = "csv";
  app.add_option("--config", config_path, "Configuration file")
      ->check(CLI::ExistingFile);
  auto* seed_opt =
      app.add_option("--seed", seed, "Seed; overrides the config file");
  app.add_option("--out", out_dir, "Output directory for CSV/SVG files");
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "svg"}));

  static const char* kHelp[] = {
      "Solve the market equilibrium and verify it",
      "Match owners to centers",
      "Run federated training with dynamic adjustment",
      "Sweep the model owner's payment",
      "Sweep one owner's data quantity",
      "Sweep misreported data quality",
      "Compare the equilibrium payment with fixed and random payments",
      "A/B test dynamic adjustment against static reported qualities"};
  // Set before the subcommands exist so they inherit it and hand the global
  // options back to the parent.
  app.fallthrough();
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < rdfl_command_count(); ++i) {
    commands.push_back(app.add_subcommand(rdfl_command_name(i), kHelp[i]));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  std::string command;
  for (auto* sub : commands) {
    if (sub->parsed()) command = sub->get_name();
  }

  ConfigHandle config;
  rdfl_status st = rdfl_config_create(&config.ptr);
  if (st != RDFL_OK) return Report(st, "config");
  if (!config_path.empty()) {
    st = rdfl_config_load_file(config.ptr, config_path.c_str());
    if (st != RDFL_OK) return Report(st, "config");
  }
  if (seed_opt->count() > 0) {
    st = rdfl_config_set(config.ptr, "seed", std::to_string(seed).c_str());
    if (st != RDFL_OK) return Report(st, "config");
  }
  st = rdfl_config_validate(config.ptr);
  if (st != RDFL_OK) return Report(st, "config");

  ReportHandle report;
  st = rdfl_run(config.ptr, command.c_str(), &report.ptr);
  if (st != RDFL_OK) return Report(st, command.c_str());

  std::fputs(rdfl_report_summary(report.ptr), stdout);

  if (out_dir.empty()) {
    if (format == "svg") {
      for (std::size_t i = 0; i < rdfl_report_chart_count(report.ptr); ++i) {
        std::fputs(rdfl_report_chart_svg(report.ptr, i), stdout);
      }
    }
    return kExitOk;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "rdfl: cannot create %s: %s\n", out_dir.c_str(),
                 ec.message().c_str());
    return kExitRuntime;
  }
  const std::filesystem::path dir(out_dir);
  std::vector<std::string> written;
  for (std::size_t i = 0; i < rdfl_report_table_count(report.ptr); ++i) {
    const auto path =
        dir / (std::string(rdfl_report_table_name(report.ptr, i)) + ".csv");
    if (!WriteFile(path, rdfl_report_table_csv(report.ptr, i))) {
      std::fprintf(stderr, "rdfl: cannot write %s\n", path.c_str());
      return kExitRuntime;
    }
    written.push_back(path.string());
  }
  if (format == "svg") {
    for (std::size_t i = 0; i < rdfl_report_chart_count(report.ptr); ++i) {
      const auto path =
          dir / (std::string(rdfl_report_chart_name(report.ptr, i)) + ".svg");
      if (!WriteFile(path, rdfl_report_chart_svg(report.ptr, i))) {
        std::fprintf(stderr, "rdfl: cannot write %s\n", path.c_str());
        return kExitRuntime;
      }
      written.push_back(path.string());
    }
  }
  for (const auto& w : written) std::printf("wrote %s\n", w.c_str());
  return kExitOk;
}
