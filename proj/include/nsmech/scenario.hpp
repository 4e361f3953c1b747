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

#pragma once

// Scenario files: INI text with the sections
//   [scenario]   name, model (oscillator | furuta), dt, t_end,
//                controller (none | feedback | feedback+impulse)
//   [stepper]    optional tol, j_max, gamma, restitution, tol_v
//   [params]     model parameter overrides
//   [initial]    q, v as space separated lists, optional t
//   [controller] controller settings
//   [sweep]      optional grid axes, key q_<i> or v_<i>:
//                "start stop count" or "start stop count open"
// Numeric values accept simple products and quotients of numbers and `pi`,
// e.g. `8*pi/9` or `-pi/2`.

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsmech/controllers.hpp"
#include "nsmech/stepper.hpp"

namespace nsmech {

/// Evaluates a value such as "2*pi/3". Throws ScenarioError.
double parse_value(const std::string& text);

enum class ModelKind : std::uint8_t { kOscillator, kFuruta };
enum class ControlMode : std::uint8_t { kNone, kFeedbackOnly, kFeedbackPlusImpulse };

struct SweepAxis {
  /// 'q' or 'v'.
  char field = 'q';
  int index = 0;
  double start = 0.0;
  double stop = 0.0;
  int count = 1;
  /// Excludes `stop` from the grid.
  bool open = false;

  std::vector<double> values() const;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  /// Every stride-th step goes into the merged phase CSV.
  int stride = 1;
};

struct Scenario {
  std::string name;
  ModelKind model = ModelKind::kOscillator;
  std::map<std::string, double> params;
  State initial;
  StepperConfig stepper;
  double t_end = 0.0;
  ControlMode control = ControlMode::kNone;
  std::map<std::string, std::string> controller;
  std::optional<SweepSpec> sweep;

  /// Throws ScenarioError.
  void validate() const;
};

/// Throws ScenarioError for unreadable or malformed files.
Scenario load_scenario(const std::filesystem::path& file);
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");

OscillatorParams oscillator_params(const Scenario& s);
FurutaParams furuta_params(const Scenario& s);
OscCtrlParams osc_ctrl_params(const Scenario& s);
FurutaCtrlParams furuta_ctrl_params(const Scenario& s);

/// The simulated plant. With a controller attached, the oscillator's spring
/// and damper are carried by the feedback law and removed from the plant.
std::unique_ptr<MechanicalModel> make_model(const Scenario& s);
/// Null for ControlMode::kNone.
std::unique_ptr<Controller> make_controller(const Scenario& s);

struct RunSummary {
  std::string name;
  State initial;
  State final_state;
  std::vector<ControlEvent> events;
  int nonconverged_steps = 0;
  int max_iterations = 0;
  /// Per coordinate: start of the final interval with |v_i| <= tol_v.
  std::vector<std::optional<double>> stick_time;
  /// Largest step-to-step energy increase.
  double max_energy_increase = 0.0;
  double initial_energy = 0.0;
  double wall_seconds = 0.0;
  /// Non-empty if the run failed.
  std::string error;
};

struct RunOptions {
  /// Writes trajectory.csv, events.csv and summary.txt when set.
  std::optional<std::filesystem::path> out_dir;
};

RunSummary run_scenario(const Scenario& s, const RunOptions& opts = {});
/// As run_scenario, but rows (without header) go to `trajectory` every
/// `stride` steps when it is non-null and opts.out_dir is unset.
RunSummary run_scenario_to(const Scenario& s, const RunOptions& opts,
                           std::ostream* trajectory, int stride);

void write_summary(std::ostream& out, const RunSummary& r);

/// Cell initial states of the grid, last axis fastest.
std::vector<State> sweep_cells(const Scenario& s);

struct SweepOptions {
  int workers = 1;
  /// Writes cell_<k>.csv files, the merged phase.csv and sweep_summary.csv
  /// when set.
  std::optional<std::filesystem::path> out_dir;
};

/// Runs every cell; failures are recorded in RunSummary::error.
std::vector<RunSummary> run_sweep(const Scenario& s, const SweepOptions& opts);

}  // namespace nsmech
