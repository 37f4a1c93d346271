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

#include "rdfl/rdfl.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "equilibrium.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "matching.hpp"
#include "table.hpp"

struct rdfl_config {
  rdfl::ExperimentConfig value;
};

struct rdfl_report {
  std::string summary;
  std::vector<std::pair<std::string, std::string>> tables;  // name, csv
  std::vector<std::pair<std::string, std::string>> charts;  // name, svg
};

namespace {

thread_local std::string g_last_error;

rdfl_status ToStatus(rdfl::ErrorCode code) {
  return static_cast<rdfl_status>(static_cast<int>(code));
}

// Runs `body`, translating exceptions into status codes.
template <typename Fn>
rdfl_status Guard(Fn&& body) {
  try {
    body();
    g_last_error.clear();
    return RDFL_OK;
  } catch (const rdfl::Error& e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RDFL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RDFL_ERR_INTERNAL;
  }
}

void NeedPointer(const void* p, const char* what) {
  if (p == nullptr) {
    rdfl::Fail(rdfl::ErrorCode::kInvalidArgument,
               std::string(what) + " must not be null");
  }
}

rdfl::MarketParams ToParams(const rdfl_market_params* p) {
  rdfl::MarketParams out;
  if (p != nullptr) {
    out.lambda = p->lambda;
    out.rho = p->rho;
    out.epsilon = p->epsilon;
    out.alpha = p->alpha;
    out.xi = p->xi;
  }
  return out;
}

std::vector<rdfl::DataOwner> Owners(const double* f, size_t n) {
  std::vector<rdfl::DataOwner> owners(n);
  for (size_t i = 0; i < n; ++i) {
    owners[i].id = static_cast<int>(i + 1);
    owners[i].reported_quality = f[i];
  }
  return owners;
}

std::vector<rdfl::ComputeCenter> Centers(const double* sigma, size_t m) {
  std::vector<rdfl::ComputeCenter> centers(m);
  for (size_t i = 0; i < m; ++i) {
    centers[i].id = static_cast<int>(i + 1);
    centers[i].sigma = sigma[i];
  }
  return centers;
}

rdfl::SweepAxis ChartAxis(const std::string& name) {
  if (name == "sweep_eta" || name == "compare") {
    return rdfl::SweepAxis::kServer;
  }
  if (name == "compare_owner") return rdfl::SweepAxis::kMeanOwner;
  return rdfl::SweepAxis::kFocus;
}

}  // namespace

extern "C" {

const char* rdfl_version(void) { return "0.1.0"; }

const char* rdfl_status_string(rdfl_status status) {
  switch (status) {
    case RDFL_OK:
      return "ok";
    case RDFL_ERR_INTERNAL:
      return "internal-error";
    default:
      if (status >= RDFL_ERR_INVALID_ARGUMENT && status <= RDFL_ERR_IO) {
        return rdfl::ErrorCodeName(static_cast<rdfl::ErrorCode>(status));
      }
      return "unknown-status";
  }
}

const char* rdfl_last_error(void) { return g_last_error.c_str(); }

rdfl_status rdfl_config_create(rdfl_config** out) {
  return Guard([&] {
    NeedPointer(out, "out");
    *out = new rdfl_config();
  });
}

void rdfl_config_destroy(rdfl_config* config) { delete config; }

rdfl_status rdfl_config_parse(rdfl_config* config, const char* text) {
  return Guard([&] {
    NeedPointer(config, "config");
    NeedPointer(text, "text");
    config->value = rdfl::ParseConfig(text, "<string>", config->value);
  });
}

rdfl_status rdfl_config_load_file(rdfl_config* config, const char* path) {
  return Guard([&] {
    NeedPointer(config, "config");
    NeedPointer(path, "path");
    config->value = rdfl::LoadConfig(path, config->value);
  });
}

rdfl_status rdfl_config_set(rdfl_config* config, const char* key,
                            const char* value) {
  return Guard([&] {
    NeedPointer(config, "config");
    NeedPointer(key, "key");
    NeedPointer(value, "value");
    rdfl::SetConfigValue(config->value, key, value);
  });
}

rdfl_status rdfl_config_validate(const rdfl_config* config) {
  return Guard([&] {
    NeedPointer(config, "config");
    config->value.Validate();
  });
}

rdfl_status rdfl_config_hash(const rdfl_config* config, char out[17]) {
  return Guard([&] {
    NeedPointer(config, "config");
    NeedPointer(out, "out");
    const std::string h = config->value.Hash();
    std::memcpy(out, h.c_str(), 17);
  });
}

size_t rdfl_command_count(void) { return rdfl::CommandNames().size(); }

const char* rdfl_command_name(size_t index) {
  const auto& names = rdfl::CommandNames();
  return index < names.size() ? names[index].c_str() : nullptr;
}

rdfl_status rdfl_run(const rdfl_config* config, const char* command,
                     rdfl_report** out) {
  return Guard([&] {
    NeedPointer(config, "config");
    NeedPointer(command, "command");
    NeedPointer(out, "out");
    *out = nullptr;
    const rdfl::CommandOutput result = rdfl::RunCommand(command, config->value);
    auto report = std::make_unique<rdfl_report>();
    report->summary = result.summary;
    for (const auto& t : result.tables) {
      report->tables.emplace_back(t.name, t.ToCsv());
    }
    for (const auto& s : result.sweeps) {
      report->charts.emplace_back(
          s.name, rdfl::RenderSvg(s, ChartAxis(s.name),
                                  s.name + " (" + config->value.scenario + ")"));
      if (s.name == "deviation") {
        report->charts.emplace_back(
            "deviation_u_server",
            rdfl::RenderSvg(s, rdfl::SweepAxis::kServer,
                            "deviation u_server (" + config->value.scenario +
                                ")"));
      }
    }
    *out = report.release();
  });
}

void rdfl_report_destroy(rdfl_report* report) { delete report; }

const char* rdfl_report_summary(const rdfl_report* report) {
  return report ? report->summary.c_str() : nullptr;
}

size_t rdfl_report_table_count(const rdfl_report* report) {
  return report ? report->tables.size() : 0;
}

const char* rdfl_report_table_name(const rdfl_report* report, size_t index) {
  if (!report || index >= report->tables.size()) return nullptr;
  return report->tables[index].first.c_str();
}

const char* rdfl_report_table_csv(const rdfl_report* report, size_t index) {
  if (!report || index >= report->tables.size()) return nullptr;
  return report->tables[index].second.c_str();
}

size_t rdfl_report_chart_count(const rdfl_report* report) {
  return report ? report->charts.size() : 0;
}

const char* rdfl_report_chart_name(const rdfl_report* report, size_t index) {
  if (!report || index >= report->charts.size()) return nullptr;
  return report->charts[index].first.c_str();
}

const char* rdfl_report_chart_svg(const rdfl_report* report, size_t index) {
  if (!report || index >= report->charts.size()) return nullptr;
  return report->charts[index].second.c_str();
}

void rdfl_market_params_default(rdfl_market_params* params) {
  if (params == nullptr) return;
  const rdfl::MarketParams d;
  *params = {d.lambda, d.rho, d.epsilon, d.alpha, d.xi};
}

rdfl_status rdfl_optimal_payment(const double* quality, size_t n,
                                 const rdfl_market_params* params,
                                 double* eta) {
  return Guard([&] {
    NeedPointer(quality, "quality");
    NeedPointer(eta, "eta");
    const auto owners = Owners(quality, n);
    *eta = rdfl::OptimalPayment(owners, ToParams(params));
  });
}

rdfl_status rdfl_solve_sne(const double* quality, size_t n,
                           const double* sigma, size_t m,
                           const rdfl_market_params* params, double* eta,
                           double* q, double* x, double* d, double* u_server,
                           double* max_gain) {
  return Guard([&] {
    NeedPointer(quality, "quality");
    NeedPointer(sigma, "sigma");
    const auto sol =
        rdfl::SolveSne(Owners(quality, n), Centers(sigma, m), ToParams(params));
    if (eta) *eta = sol.profile.eta;
    for (size_t i = 0; i < n; ++i) {
      if (q) q[i] = sol.profile.contributions[i].quality;
      if (x) x[i] = sol.profile.contributions[i].quantity;
    }
    for (size_t j = 0; j < m && d; ++j) d[j] = sol.profile.undertakings[j];
    if (u_server) *u_server = sol.profile.utilities->server;
    if (max_gain) *max_gain = rdfl::VerifySne(sol).MaxGain();
  });
}

rdfl_status rdfl_match(const double* x, size_t n, const double* sigma,
                       const double* d, size_t m, int64_t* owner_center,
                       size_t* blocking_pairs) {
  return Guard([&] {
    NeedPointer(x, "x");
    NeedPointer(sigma, "sigma");
    NeedPointer(d, "d");
    NeedPointer(owner_center, "owner_center");
    const auto centers = Centers(sigma, m);
    const auto prefs = rdfl::BuildPreferences({x, n}, centers, {d, m});
    const auto matching = rdfl::GaleShapley(prefs);
    for (size_t k = 0; k < n; ++k) {
      const auto c = matching.owner_center[k];
      owner_center[k] = c ? static_cast<int64_t>(*c) : -1;
    }
    if (blocking_pairs) {
      *blocking_pairs = rdfl::FindBlockingPairs(matching, prefs).size();
    }
  });
}

}  // extern "C"
