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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "doctest.h"
#include "error.hpp"
#include "experiments.hpp"
#include "table.hpp"

namespace {

rdfl::ErrorCode CodeOf(const std::string& text) {
  try {
    rdfl::ParseConfig(text, "test.cfg").Validate();
  } catch (const rdfl::Error& e) {
    return e.code();
  }
  FAIL("expected a config error for: " << text);
  return rdfl::ErrorCode::kIo;
}

std::string MessageOf(const std::string& text) {
  try {
    rdfl::ParseConfig(text, "test.cfg").Validate();
  } catch (const rdfl::Error& e) {
    return e.what();
  }
  return {};
}

rdfl::ExperimentConfig Fixture(const std::string& quality,
                               const std::string& sigma) {
  return rdfl::ParseConfig("seed = 5\nowners.count = " +
                           std::to_string(std::count(quality.begin(),
                                                     quality.end(), ',') + 1) +
                           "\nowners.quality = " + quality +
                           "\ncenters.sigma = " + sigma + "\n");
}

// Strictly up then strictly down, with the peak strictly inside.
bool SingleInteriorPeak(const std::vector<double>& y) {
  const auto peak = static_cast<std::size_t>(
      std::max_element(y.begin(), y.end()) - y.begin());
  if (peak == 0 || peak + 1 == y.size()) return false;
  for (std::size_t i = 1; i <= peak; ++i) {
    if (!(y[i] > y[i - 1])) return false;
  }
  for (std::size_t i = peak + 1; i < y.size(); ++i) {
    if (!(y[i] < y[i - 1])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = rdfl::ParseConfig(
      "# comment\n"
      "seed = 42\n"
      "owners.count = 3   # trailing comment\n"
      "owners.quality = 0.5, 0.8, 1.0\n"
      "centers.count = 4\n"
      "centers.sigma = uniform(0.2, 0.9)\n"
      "market.alpha = 6\n"
      "trainer.kind = gradient\n"
      "strategy.mode = fixed-eta\n"
      "sweep.counts = 4, 8\n");
  CHECK(c.seed == 42);
  CHECK(c.has_seed);
  CHECK(c.owners == 3);
  CHECK(c.CenterCount() == 4);
  CHECK(c.quality.kind == rdfl::ValueSpec::Kind::kList);
  CHECK(c.quality.values == std::vector<double>{0.5, 0.8, 1.0});
  CHECK(c.sigma.kind == rdfl::ValueSpec::Kind::kUniform);
  CHECK(c.sigma.low == 0.2);
  CHECK(c.sigma.high == 0.9);
  CHECK(c.market.alpha == 6.0);
  CHECK(c.trainer.trainer == rdfl::TrainerKind::kGradient);
  CHECK(c.strategy == rdfl::StrategyMode::kFixedEta);
  CHECK(c.sweep_counts == std::vector<std::size_t>{4, 8});
  CHECK_NOTHROW(c.Validate());
  CHECK(c.RandomEtaHigh() == 12.0);
}

TEST_CASE("config errors are reported with their location") {
  CHECK(CodeOf("seed = 1\nmarket.alhpa = 3\n") == rdfl::ErrorCode::kConfig);
  CHECK(MessageOf("seed = 1\nmarket.alhpa = 3\n").find("test.cfg:2") !=
        std::string::npos);
  CHECK(CodeOf("owners.count = 4\n") == rdfl::ErrorCode::kConfig);
  CHECK(CodeOf("seed = 1\nowners.count = 1\n") == rdfl::ErrorCode::kConfig);
  CHECK(CodeOf("seed = 1\ncenters.count = 3\nowners.count = 4\n") ==
        rdfl::ErrorCode::kConfig);
  CHECK(CodeOf("seed = x\n") == rdfl::ErrorCode::kConfig);
  CHECK(CodeOf("seed = 1\nnot a pair\n") == rdfl::ErrorCode::kConfig);
  CHECK(CodeOf("seed = 1\nowners.count = 3\nowners.quality = 0.5, 0.8\n") ==
        rdfl::ErrorCode::kConfig);
  CHECK(CodeOf("seed = 1\ntrainer.adjust_round = 20\n") ==
        rdfl::ErrorCode::kConfig);
  CHECK(CodeOf("seed = 1\nstrategy.mode = best\n") == rdfl::ErrorCode::kConfig);
}

TEST_CASE("every listed key is accepted and the hash tracks the content") {
  const auto keys = rdfl::ConfigKeys();
  CHECK(std::find(keys.begin(), keys.end(), "market.lambda") != keys.end());
  const auto a = rdfl::ParseConfig("seed = 1\n");
  const auto b = rdfl::ParseConfig("seed = 1\n# same\n");
  const auto c = rdfl::ParseConfig("seed = 2\n");
  CHECK(a.Hash() == b.Hash());
  CHECK(a.Hash() != c.Hash());
  CHECK(a.Hash().size() == 16);
  // Canonical output parses back to the same configuration.
  CHECK(rdfl::ParseConfig(a.Canonical()).Hash() == a.Hash());
}

TEST_CASE("doubles survive the CSV round trip bit for bit") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(rdfl::ParseDouble(rdfl::FormatDouble(v)) == v);
  }
  CHECK(std::isnan(rdfl::ParseDouble(rdfl::FormatDouble(NAN))));
  CHECK(rdfl::ParseDouble("inf") == INFINITY);
  CHECK_THROWS_AS(rdfl::ParseDouble("1.0x"), rdfl::Error);

  rdfl::SweepResult s;
  s.name = "sweep_eta";
  s.variable = "eta";
  s.focus_name = "total_quality";
  s.config_hash = "0123456789abcdef";
  s.seed = 77;
  s.rows = {{"qd-rdfl", 0.1, 1.0 / 3.0, -0.25, 2.0},
            {"qd-rdfl", 0.2, 1e-17, 0.5, 3.0}};
  std::stringstream io;
  s.WriteCsv(io);
  const auto back = rdfl::SweepResult::ReadCsv(io);
  CHECK(back.rows == s.rows);
  CHECK(back.name == s.name);
  CHECK(back.variable == s.variable);
  CHECK(back.focus_name == s.focus_name);
  CHECK(back.config_hash == s.config_hash);
  CHECK(back.seed == s.seed);
}

TEST_CASE("table CSV") {
  rdfl::Table t;
  t.name = "t";
  t.comment = "a=1";
  t.header = {"x", "y"};
  t.AddRow({"1", "2"});
  CHECK(t.ToCsv() == "# a=1\nx,y\n1,2\n");
  CHECK_THROWS_AS(t.AddRow({"1"}), rdfl::Error);
  std::istringstream in(t.ToCsv());
  const auto back = rdfl::Table::ReadCsv(in, "t");
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  t.AddRow({"1,2", "3"});
  CHECK_THROWS_AS(t.ToCsv(), rdfl::Error);
}

TEST_CASE("payment sweep has one interior peak at the optimum") {
  for (const auto& cfg : {Fixture("1, 1", "1, 1"), Fixture("0.3, 0.9", "0.4, 0.8"),
                          Fixture("0.5, 0.8, 1.0", "0.2, 0.5, 0.9")}) {
    const auto sweep = rdfl::SweepEta(cfg);
    REQUIRE(sweep.rows.size() == cfg.sweep_steps);
    std::vector<double> us;
    for (const auto& r : sweep.rows) us.push_back(r.u_server);
    CHECK(SingleInteriorPeak(us));
    // The grid ends at twice eta*, so eta* is the middle point.
    CHECK(us[50] == *std::max_element(us.begin(), us.end()));
  }
}

TEST_CASE("owner quantity sweep has one interior peak") {
  for (const auto& cfg : {Fixture("1, 1", "1, 1"), Fixture("0.3, 0.9", "0.4, 0.8"),
                          Fixture("0.5, 0.8, 1.0", "0.2, 0.5, 0.9")}) {
    const auto sweep = rdfl::SweepOwner(cfg);
    std::vector<double> un;
    for (const auto& r : sweep.rows) un.push_back(r.focus);
    CHECK(SingleInteriorPeak(un));
  }
}

TEST_CASE("commands are deterministic for a seed") {
  auto cfg = rdfl::ParseConfig("seed = 11\nowners.count = 6\nsweep.runs = 5\n"
                               "sweep.counts = 4, 6\nthreads = 1\n");
  for (const std::string cmd : {"solve", "match", "sweep-eta", "compare"}) {
    const auto a = rdfl::RunCommand(cmd, cfg);
    const auto b = rdfl::RunCommand(cmd, cfg);
    REQUIRE(a.tables.size() == b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) {
      CHECK(a.tables[i].ToCsv() == b.tables[i].ToCsv());
    }
    CHECK(a.summary == b.summary);
  }
}

TEST_CASE("compare rows do not depend on the thread count") {
  auto cfg = rdfl::ParseConfig("seed = 3\nsweep.runs = 6\n"
                               "sweep.counts = 4, 8\n");
  const auto serial = rdfl::Compare(cfg);
  cfg.threads = 5;
  const auto parallel = rdfl::Compare(cfg);
  REQUIRE(serial.size() == 12);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(parallel[i].owners == serial[i].owners);
    CHECK(parallel[i].run == serial[i].run);
    CHECK(parallel[i].seed == serial[i].seed);
    for (int k = 0; k < 3; ++k) {
      CHECK(parallel[i].u_server[k] == serial[i].u_server[k]);
      CHECK(parallel[i].mean_u_owner[k] == serial[i].mean_u_owner[k]);
    }
  }
  CHECK(serial[0].owners == 4);
  CHECK(serial.back().owners == 8);
}

TEST_CASE("equilibrium payment beats the baselines for the model owner") {
  const auto cfg = rdfl::ParseConfig("seed = 8\nsweep.runs = 10\n"
                                     "sweep.counts = 4, 12\n");
  for (const auto& run : rdfl::Compare(cfg)) {
    CHECK(run.u_server[0] >= run.u_server[1] - 1e-12);
    CHECK(run.u_server[0] >= run.u_server[2] - 1e-12);
    CHECK(run.eta[1] == cfg.fixed_eta);
  }
}

TEST_CASE("misreporting deviations") {
  // 1/f_1 + 1/f_2 stays below alpha over the whole grid, so the market
  // remains viable at every deviation.
  auto cfg = Fixture("0.8, 1.0", "0.4, 0.8");
  cfg.deviation_owners = {1, 2};
  const auto sweep = rdfl::Deviate(cfg);
  for (const std::string series : {"D1", "D2"}) {
    std::vector<double> un;
    for (const auto& r : sweep.rows) {
      if (r.series == series) un.push_back(r.focus);
    }
    REQUIRE(un.size() == cfg.deviation_steps);
    for (std::size_t i = 1; i < un.size(); ++i) CHECK(un[i] > un[i - 1]);
  }
  std::size_t zero_rows = 0;
  for (const auto& r : sweep.rows) {
    if (r.x == 0.0 && r.series == "D1") ++zero_rows;
  }
  CHECK(zero_rows == 1);

  // Two owners with 1/0.3 + 1/0.9 close to alpha: under-reporting by 20%
  // leaves no viable market, reported as NaN rather than as a number.
  auto tight = Fixture("0.3, 0.9", "0.4, 0.8");
  const auto gaps = rdfl::Deviate(tight);
  CHECK(std::isnan(gaps.rows.front().focus));
  CHECK(std::isfinite(gaps.rows.back().focus));
}

TEST_CASE("unknown commands and invalid configs are rejected") {
  const auto cfg = rdfl::ParseConfig("seed = 1\n");
  CHECK_THROWS_AS(rdfl::RunCommand("frobnicate", cfg), rdfl::Error);
  rdfl::ExperimentConfig no_seed;
  try {
    rdfl::RunCommand("solve", no_seed);
    FAIL("expected a config error");
  } catch (const rdfl::Error& e) {
    CHECK(e.code() == rdfl::ErrorCode::kConfig);
  }
  CHECK(rdfl::CommandNames().size() == 8);
}

TEST_CASE("sign test") {
  CHECK(rdfl::SignTestPValue(0, 10) == doctest::Approx(1.0));
  CHECK(rdfl::SignTestPValue(10, 10) == doctest::Approx(std::pow(0.5, 10)));
  CHECK(rdfl::SignTestPValue(9, 10) == doctest::Approx(11.0 / 1024.0));
}

TEST_CASE("svg charts draw one polyline per series") {
  rdfl::SweepResult s;
  s.name = "s";
  s.variable = "x";
  s.focus_name = "f";
  s.rows = {{"a", 0, 1, 1, 1}, {"a", 1, 2, 2, 2}, {"b", 0, 0, 0, 0},
            {"b", 1, NAN, 1, 1}};
  const auto svg = rdfl::RenderSvg(s, rdfl::SweepAxis::kServer, "title");
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t lines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos;
       p = svg.find("<polyline", p + 1)) {
    ++lines;
  }
  CHECK(lines == 2);
}
