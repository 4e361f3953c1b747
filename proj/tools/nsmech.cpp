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

// Command-line runner: `run`, `sweep` and `verify`.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nsmech/errors.hpp"
#include "nsmech/scenario.hpp"
#include "nsmech/verify.hpp"

#ifndef NSMECH_SCENARIO_DIR
#define NSMECH_SCENARIO_DIR "scenarios"
#endif

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kVerifyFailed = 2;

struct Overrides {
  std::optional<double> dt;
  std::optional<double> t_end;
};

nsmech::Scenario load(const std::string& file, const Overrides& o) {
  nsmech::Scenario s = nsmech::load_scenario(file);
  if (o.dt) s.stepper.dt = *o.dt;
  if (o.t_end) s.t_end = *o.t_end;
  s.validate();
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonsmooth mechanics scenario runner"};
  app.require_subcommand(1);

  Overrides over;
  std::string scenario_file;
  std::optional<std::string> out_dir;
  int workers = 1;
  std::string scenario_dir = NSMECH_SCENARIO_DIR;
  bool primary_only = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--dt", over.dt, "Override the time step")->check(CLI::PositiveNumber);
    cmd->add_option("--t-end", over.t_end, "Override the end time");
    cmd->add_option("--out-dir", out_dir, "Directory for CSV output");
  };

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("scenario", scenario_file, "Scenario file")->required();
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "Run the [sweep] grid of a scenario");
  sweep->add_option("scenario", scenario_file, "Scenario file")->required();
  add_common(sweep);
  sweep->add_option("--workers", workers, "Concurrent cells")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run the acceptance checks");
  verify->add_option("--dt", over.dt, "Override the time step of scenario checks")
      ->check(CLI::PositiveNumber);
  verify->add_option("--workers", workers, "Workers for the sweep checks")
      ->check(CLI::PositiveNumber)
      ->default_val(4);
  verify->add_option("--scenario-dir", scenario_dir, "Directory with the scenario files");
  verify->add_option("--out-dir", out_dir, "Also write report.tsv there");
  verify->add_flag("--primary-only", primary_only, "Skip the supplementary checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (run->parsed()) {
      const nsmech::Scenario s = load(scenario_file, over);
      nsmech::RunOptions opts;
      if (out_dir) opts.out_dir = *out_dir;
      const nsmech::RunSummary r = nsmech::run_scenario(s, opts);
      nsmech::write_summary(std::cout, r);
      std::cout << "wall_seconds = " << r.wall_seconds << '\n';
      return r.error.empty() ? kOk : kInvalid;
    }
    if (sweep->parsed()) {
      const nsmech::Scenario s = load(scenario_file, over);
      nsmech::SweepOptions opts;
      opts.workers = workers;
      if (out_dir) opts.out_dir = *out_dir;
      const auto cells = nsmech::run_sweep(s, opts);
      int failed = 0;
      for (const auto& c : cells) {
        if (!c.error.empty()) {
          ++failed;
          std::cerr << c.name << ": " << c.error << '\n';
        }
      }
      std::cout << cells.size() << " cells, " << failed << " failed\n";
      return kOk;
    }
    nsmech::VerifyOptions opts;
    opts.scenario_dir = scenario_dir;
    opts.workers = workers;
    opts.dt = over.dt;
    opts.supplementary = !primary_only;
    const auto results = nsmech::run_verify(opts);
    nsmech::write_report(std::cout, results);
    if (out_dir) {
      std::filesystem::create_directories(*out_dir);
      std::ofstream f(std::filesystem::path(*out_dir) / "report.tsv");
      nsmech::write_report(f, results);
    }
    bool all = true;
    for (const auto& r : results) all = all && r.pass;
    return all ? kOk : kVerifyFailed;
  } catch (const nsmech::ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kInvalid;
  } catch (const nsmech::ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
}
