// Copyright 2026 The nsmech Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "nsmech/errors.hpp"
#include "nsmech/scenario.hpp"

namespace nsmech {
namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nsmech_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kSmall = R"(
[scenario]
name = small
model = oscillator
dt = 1e-3
t_end = 0.5
controller = none

[initial]
q = -4 0
v = -4 0
)";

TEST(ParseValue, Examples) {
  EXPECT_DOUBLE_EQ(parse_value("2.5"), 2.5);
  EXPECT_DOUBLE_EQ(parse_value("-1e-3"), -1e-3);
  EXPECT_DOUBLE_EQ(parse_value("pi"), kPi);
  EXPECT_DOUBLE_EQ(parse_value("2*pi/3"), 2 * kPi / 3);
  EXPECT_DOUBLE_EQ(parse_value(" -pi/2 "), -kPi / 2);
  EXPECT_DOUBLE_EQ(parse_value("8*pi/9"), 8 * kPi / 9);
}

TEST(ParseValue, Errors) {
  for (const char* bad : {"", "pie", "2**3", "1/", "abc", "3 4"}) {
    EXPECT_THROW(parse_value(bad), ScenarioError) << bad;
  }
}

TEST(SweepAxis, Values) {
  SweepAxis closed{'q', 0, -6.0, 6.0, 13, false};
  const auto a = closed.values();
  ASSERT_EQ(a.size(), 13u);
  EXPECT_DOUBLE_EQ(a.front(), -6.0);
  EXPECT_DOUBLE_EQ(a.back(), 6.0);
  EXPECT_DOUBLE_EQ(a[7], 1.0);
  SweepAxis open{'q', 1, 2 * kPi / 3, kPi / 2, 12, true};
  const auto b = open.values();
  ASSERT_EQ(b.size(), 12u);
  EXPECT_DOUBLE_EQ(b.front(), 2 * kPi / 3);
  EXPECT_NEAR(b.back(), 2 * kPi / 3 + 11.0 * (kPi / 2 - 2 * kPi / 3) / 12.0, 1e-15);
  SweepAxis single{'v', 0, 3.0, 3.0, 1, false};
  EXPECT_EQ(single.values(), std::vector<double>{3.0});
}

TEST(ParseScenario, Basics) {
  const Scenario s = parse_scenario(kSmall);
  EXPECT_EQ(s.name, "small");
  EXPECT_EQ(s.model, ModelKind::kOscillator);
  EXPECT_DOUBLE_EQ(s.t_end, 0.5);
  EXPECT_EQ(s.control, ControlMode::kNone);
  EXPECT_DOUBLE_EQ(s.initial.q[0], -4.0);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(make_controller(s), nullptr);
}

TEST(ParseScenario, RejectsMalformed) {
  EXPECT_THROW(parse_scenario("[scenario]\nmodel = rocket\n"), ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kSmall) + "\n[params]\nbogus = 1\n").validate(),
               ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(kSmall) + "\n[params]\nk1 = 0\n").validate(),
               ScenarioError);
  EXPECT_THROW(load_scenario("/nonexistent/none.ini"), ScenarioError);
}

TEST(ShippedScenarios, AllValidate) {
  int n = 0;
  for (const auto& entry : fs::directory_iterator(NSMECH_SCENARIO_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    ++n;
    const Scenario s = load_scenario(entry.path());
    EXPECT_NO_THROW(s.validate()) << entry.path();
    EXPECT_EQ(s.name, entry.path().stem().string());
    if (s.sweep) {
      EXPECT_GT(sweep_cells(s).size(), 1u) << entry.path();
    }
  }
  EXPECT_GE(n, 11);
}

TEST(ControlledPlant, CarriesNoSpring) {
  const Scenario s = load_scenario(fs::path(NSMECH_SCENARIO_DIR) / "osc-ctrl-bvp.ini");
  const auto model = make_model(s);
  const Vector h = model->smooth_forces(s.initial.q, s.initial.v, 0.0);
  EXPECT_EQ(h[0], 0.0);
  EXPECT_NE(make_controller(s), nullptr);
}

TEST(RunScenario, ByteIdenticalOutput) {
  const Scenario s = parse_scenario(kSmall);
  const fs::path a = fresh_dir("run_a");
  const fs::path b = fresh_dir("run_b");
  const RunSummary ra = run_scenario(s, RunOptions{a});
  const RunSummary rb = run_scenario(s, RunOptions{b});
  EXPECT_TRUE(ra.error.empty());
  const std::string ta = slurp(a / "trajectory.csv");
  EXPECT_EQ(ta, slurp(b / "trajectory.csv"));
  EXPECT_EQ(slurp(a / "events.csv"), slurp(b / "events.csv"));
  EXPECT_TRUE(fs::exists(a / "summary.txt"));
  // Header plus one row per state.
  EXPECT_EQ(std::count(ta.begin(), ta.end(), '\n'), 502);
  EXPECT_EQ(ra.final_state.q, rb.final_state.q);
}

TEST(RunScenario, StreamWithStride) {
  const Scenario s = parse_scenario(kSmall);
  std::ostringstream out;
  const RunSummary r = run_scenario_to(s, RunOptions{}, &out, 10);
  EXPECT_TRUE(r.error.empty());
  const std::string text = out.str();
  EXPECT_EQ(text.find("t,"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 51);
}

TEST(RunSweep, OutputsAndWorkerInvariance) {
  Scenario s = parse_scenario(std::string(kSmall) +
                              "\n[sweep]\nq_0 = -2 2 3\nv_0 = -1 1 2\nstride = 5\n");
  ASSERT_EQ(sweep_cells(s).size(), 6u);
  EXPECT_DOUBLE_EQ(sweep_cells(s)[1].v[0], 1.0);
  EXPECT_DOUBLE_EQ(sweep_cells(s)[2].q[0], 0.0);
  const fs::path one = fresh_dir("sweep_1");
  const fs::path four = fresh_dir("sweep_4");
  const auto r1 = run_sweep(s, SweepOptions{1, one});
  const auto r4 = run_sweep(s, SweepOptions{4, four});
  ASSERT_EQ(r1.size(), 6u);
  for (std::size_t k = 0; k < r1.size(); ++k) {
    EXPECT_TRUE(r1[k].error.empty());
    EXPECT_EQ(r1[k].final_state.q, r4[k].final_state.q);
  }
  EXPECT_EQ(slurp(one / "phase.csv"), slurp(four / "phase.csv"));
  EXPECT_EQ(slurp(one / "sweep_summary.csv"), slurp(four / "sweep_summary.csv"));
  EXPECT_TRUE(fs::exists(one / "cells" / "cell_0005.csv"));
  EXPECT_EQ(slurp(one / "phase.csv").rfind("cell,t,", 0), 0u);
}

}  // namespace
}  // namespace nsmech
