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

// Moreau midpoint time-stepping with a prox fixed-point impulse solve.
//
// One step from (q_n, v_n):
//   q_M     = q_n + dt/2 v_n
//   v_{n+1} = v_n + M(q_M)^-1 ((h(q_M, v_n) + u) dt + W(q_M) Lambda)
//   q_{n+1} = q_n + (v_n + v_{n+1}) dt/2
// where Lambda solves Lambda_k = prox_{C_k}(Lambda_k - r_k gdot_k) for every
// constraint, gdot = W(q_M)^T v_{n+1}.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nsmech/model.hpp"

namespace nsmech {

struct StepperConfig {
  double dt = 1e-3;
  /// Optional per-constraint prox parameters. Empty selects the inverse
  /// diagonal of the Delassus operator W^T M^-1 W.
  std::vector<double> r_init;
  /// Impulse fixed-point tolerance (max abs change per sweep).
  double tol = 1e-12;
  int j_max = 100;
  /// Contact prediction q + gamma v dt for unilateral activation.
  double gamma = 0.5;
  double restitution = 0.0;
  /// Velocity band treated as zero when classifying stick.
  double tol_v = 1e-8;

  /// Throws ParameterError on violated invariants.
  void validate() const;
};

enum class ImpulseMode : std::uint8_t { kStick, kSlipPos, kSlipNeg, kOpen };

std::string_view to_string(ImpulseMode mode);

struct ImpulseSolveReport {
  Vector impulses;
  /// Constraint velocities W^T v_{n+1} for the returned impulses.
  Vector gdot_plus;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = true;
  /// Set once the r parameters were halved after a stalled first pass.
  bool r_modified = false;
  std::vector<ImpulseMode> modes;
};

/// q_n + dt/2 v_n. Throws ParameterError if dt <= 0.
Vector midpoint_config(const State& state, double dt);

/// Solves the per-step impulse problem at the midpoint of the step starting
/// at `state` with the applied generalized force `u`.
///
/// Projected Gauss-Seidel over the constraints; with the default r each
/// interior update is the impulse that brings that constraint velocity to
/// zero and each boundary update is the projection onto the set. If the
/// iteration stalls for j_max sweeps, all r are halved once and the
/// iteration continues up to 2 j_max before reporting non-convergence.
ImpulseSolveReport solve_impulses(const MechanicalModel& model,
                                  const State& state, const StepperConfig& cfg,
                                  const Vector& u);

/// Advances one fixed step. A non-converged impulse solve is still applied and
/// flagged in the report.
std::pair<State, ImpulseSolveReport> step(const MechanicalModel& model,
                                          const State& state,
                                          const StepperConfig& cfg,
                                          const Vector& controller_force);

/// Instantaneous jump M(q) (v+ - v-) = impulse. Throws NumericalError when the
/// mass matrix is not positive definite.
State apply_velocity_jump(const MechanicalModel& model, const State& state,
                          const Vector& generalized_impulse);

enum class ControlEventKind : std::uint8_t { kImpulseOsc, kImpulseFuruta };

std::string_view to_string(ControlEventKind kind);

/// Record of one impulsive control application.
struct ControlEvent {
  double t = 0.0;
  ControlEventKind kind = ControlEventKind::kImpulseOsc;
  Vector pre_v;
  Vector post_v;
  /// Actuator impulse U; the generalized impulse is input_direction(q) * U.
  double impulse = 0.0;
  int estimator_iters = 0;
  std::string estimator;
  bool estimator_converged = true;
  /// Configuration at the jump, for bookkeeping checks.
  Vector q;
};

/// Control law attached to one integration run. Instances carry switching
/// state and must not be shared between concurrent runs; use clone().
class Controller {
 public:
  virtual ~Controller() = default;

  /// Continuous generalized force for the step whose midpoint configuration
  /// and start velocity are given in `mid`.
  virtual Vector force(const MechanicalModel& model, const State& mid) const = 0;

  /// Called after every accepted step. May modify `state` through
  /// apply_velocity_jump and report the jump.
  virtual std::optional<ControlEvent> after_step(
      const MechanicalModel& model, const StepperConfig& cfg, State& state,
      const ImpulseSolveReport& report) = 0;

  virtual std::unique_ptr<Controller> clone() const = 0;
};

struct Trajectory {
  std::vector<State> states;
  /// reports[k] produced states[k + 1].
  std::vector<ImpulseSolveReport> reports;
  std::vector<ControlEvent> events;
  int nonconverged_steps = 0;
  int max_iterations = 0;
};

/// Integrates from state0 to t_end with fixed steps (the step count is
/// round((t_end - t0) / dt)). `controller` may be null for free motion.
Trajectory integrate(const MechanicalModel& model, const State& state0,
                     double t_end, const StepperConfig& cfg,
                     Controller* controller);

/// Same stepping as integrate() without recording the history.
struct RunResult {
  State final_state;
  std::vector<ControlEvent> events;
  int nonconverged_steps = 0;
  int max_iterations = 0;
  long steps = 0;
};

RunResult advance(const MechanicalModel& model, const State& state0,
                  double t_end, const StepperConfig& cfg,
                  Controller* controller);

/// Called after every accepted step (and after any control jump) with the new
/// state, the report of the step and the event it triggered, if any.
using StepObserver = std::function<void(const State&, const ImpulseSolveReport&,
                                        const ControlEvent*)>;

RunResult advance(const MechanicalModel& model, const State& state0,
                  double t_end, const StepperConfig& cfg,
                  Controller* controller, const StepObserver& observer);

/// CSV header `t,q_0..,v_0..,Lambda_0..,converged`, one row per state.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

void write_trajectory_header(std::ostream& out, int dof, int num_constraints);
/// `report` is null for the initial state (zero impulses, converged).
void write_trajectory_row(std::ostream& out, const State& s,
                          const ImpulseSolveReport* report, int num_constraints);

/// CSV header `t,kind,impulse,pre_v_0..,post_v_0..,estimator_iters`.
void write_events_csv(std::ostream& out, const std::vector<ControlEvent>& events,
                      int dof);

}  // namespace nsmech
