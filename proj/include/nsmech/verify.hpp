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

// Acceptance checks over the shipped scenarios and the numerical building
// blocks. Used by `nsmech verify` and the acceptance test.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nsmech/model.hpp"
#include "nsmech/stepper.hpp"

namespace nsmech {

struct CheckResult {
  std::string id;
  std::string name;
  /// Acceptance criterion, as opposed to a supplementary check.
  bool primary = true;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::filesystem::path scenario_dir;
  /// Workers for the phase-diagram sweeps.
  int workers = 4;
  /// Overrides the dt of every scenario-based check.
  std::optional<double> dt;
  /// Smallest step of the order check; it also runs at 2x and 4x this value.
  double order_dt = 2.5e-3;
  /// Include the supplementary checks (dt robustness, order).
  bool supplementary = true;
};

std::vector<CheckResult> run_verify(const VerifyOptions& opts);

/// Tab separated table with a header line.
void write_report(std::ostream& out, const std::vector<CheckResult>& results);

/// Per-step slack for energy increases: 1e-9 e0 + 0.1 dt^2 e0.
double energy_tolerance(double e0, double dt);

struct DissipativityReport {
  double initial_energy = 0.0;
  double max_increase = 0.0;
  double tolerance = 0.0;
  long violations = 0;
  bool pass = false;
};

/// Free motion from `state0`; every step-to-step energy increase must stay
/// within energy_tolerance.
DissipativityReport check_dissipativity(const MechanicalModel& model,
                                        const State& state0, double t_end,
                                        const StepperConfig& cfg);

}  // namespace nsmech
