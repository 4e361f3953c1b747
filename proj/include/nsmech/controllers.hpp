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

// Feedback and impulsive control laws for the oscillator and the Furuta
// pendulum, and the impulse estimators they use.

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>

#include "nsmech/furuta.hpp"
#include "nsmech/oscillator.hpp"
#include "nsmech/stepper.hpp"

namespace nsmech {

// ---------------------------------------------------------------------------
// Scalar shooting

struct ShootResult {
  double s = 0.0;
  double residual = 0.0;
  int iterations = 0;
  /// Number of residual evaluations (each one a full forward simulation).
  int evaluations = 0;
  bool converged = false;
};

/// Finds a root of `residual` by Newton steps with a forward-difference slope
/// of width `ds`. Once a sign change has been seen, steps leaving the bracket
/// are replaced by bisection. Iterates and slope probes stay in [s_min, s_max].
/// Returns the best iterate seen; `converged` is set iff |residual| <= tol.
ShootResult shoot(const std::function<double(double)>& residual, double s0,
                  double ds, double tol, int max_iters,
                  double s_min = -std::numeric_limits<double>::infinity(),
                  double s_max = std::numeric_limits<double>::infinity());

// ---------------------------------------------------------------------------
// Oscillator

enum class OscEstimator : std::uint8_t { kRobustBVP, kApprox, kShooting };

std::string_view to_string(OscEstimator e);
/// Throws ParameterError for an unknown name.
OscEstimator osc_estimator_from_string(std::string_view name);

struct OscCtrlParams {
  double k1 = 1.0;
  double k2pre = 0.5;
  double k2post = 3.0;
  /// Activation bound; unset selects mu_upper * m * g of the plant.
  std::optional<double> lambda_T_max;
  OscEstimator estimator = OscEstimator::kRobustBVP;
  /// Positions closer than this to the origin count as converged.
  double tol_q = 1e-3;
  /// Steps after an impulse during which no further impulse fires.
  int refractory_steps = 1;
  bool impulses_enabled = true;
  int bvp_max_iters = 20;
  double shoot_horizon = 5.0;
  double shoot_ds = 1e-4;
  double shoot_tol = 1e-3;
  int shoot_max_iters = 20;

  /// Throws ParameterError. The overdamping requirement k2post > 2 sqrt(m k1)
  /// is enforced only for the robust BVP estimator.
  void validate(const OscillatorParams& plant) const;
  double activation_bound(const OscillatorParams& plant) const;
};

/// -k1 qx - k2 vx with k2 = k2pre before `t_switch` and k2post from then on.
double osc_feedback(double qx, double vx, double t, const OscCtrlParams& p,
                    double t_switch = std::numeric_limits<double>::infinity());

bool osc_impulse_active(double qx, double vx_minus, const OscCtrlParams& p,
                        const OscillatorParams& plant, double tol_v);

struct BvpEstimate {
  double v_plus = 0.0;
  /// Time from the impulse until the reduced solution reaches the origin.
  double t_end = 0.0;
  int newton_iters = 0;
};

/// Closed-loop characteristic data used by the robust estimators.
struct ReducedDynamics {
  double omega_n;
  double theta;
  double lambda1;
  double lambda2;
  double c_lower;
};

ReducedDynamics reduced_dynamics(const OscCtrlParams& p,
                                 const OscillatorParams& plant);

/// Post-impulse velocity that brings the reduced overdamped system with the
/// lowest friction coefficient from qx_star to rest at the origin. Throws
/// ParameterError for qx_star == 0 or theta <= 1 and EstimatorError if Newton
/// does not converge within p.bvp_max_iters.
BvpEstimate robust_bvp_estimate(double qx_star, const OscCtrlParams& p,
                                const OscillatorParams& plant);

/// -sign(qx) sqrt(2 c omega_n^2 m^2 |qx|).
double approx_impulse(double qx, const OscCtrlParams& p,
                      const OscillatorParams& plant);

/// Shooting on the post-impulse velocity with full simulations of `model`
/// (feedback only, k2post active) from (qx_star, s) at time t0. Throws
/// EstimatorError when no iterate reaches p.shoot_tol.
ShootResult shoot_oscillator(const MechanicalModel& model, double qx_star,
                             double t0, const StepperConfig& cfg,
                             const OscCtrlParams& p);

/// Feedback on the plant's input channel with k2 switching at the first
/// stick, plus optional impulses at later sticks.
class OscillatorController final : public Controller {
 public:
  OscillatorController(OscCtrlParams p, OscillatorParams plant);

  Vector force(const MechanicalModel& model, const State& mid) const override;
  std::optional<ControlEvent> after_step(const MechanicalModel& model,
                                         const StepperConfig& cfg, State& state,
                                         const ImpulseSolveReport& report) override;
  std::unique_ptr<Controller> clone() const override;

  const OscCtrlParams& params() const { return p_; }
  std::optional<double> first_stick_time() const { return t1_; }
  /// Copy with impulses disabled and the switching state kept.
  std::unique_ptr<OscillatorController> feedback_only() const;

 private:
  OscCtrlParams p_;
  OscillatorParams plant_;
  std::optional<double> t1_;
  int since_impulse_ = std::numeric_limits<int>::max();
};

// ---------------------------------------------------------------------------
// Furuta pendulum

struct FurutaCtrlParams {
  double k1 = 1.0;
  double k2pre = 5.0;
  double k2post = 5.0;
  double k3 = 20.0;
  double k4pre = 5.0;
  double k4post = 5.0;
  double theta_ref = 3.14159265358979323846;
  double theta_up = 3.14159265358979323846;
  double T_shoot = 3.0;
  double ds = 1e-4;
  double tol_shoot = 1e-3;
  int max_shoot_iters = 20;
  /// Bound on the post-impulse pendulum rate tried by the shooting.
  double s_max = 10.0;
  /// Pendulum angles within this distance of theta_up count as upright.
  double tol_q = 1e-3;
  /// No impulse while |cos theta2| is below this.
  double cos_min = 0.1;
  int refractory_steps = 1;
  bool impulses_enabled = true;

  void validate() const;
};

/// theta2 - theta_up shifted by a multiple of 2 pi into [-pi, pi).
double wrap_pendulum_error(double theta2, double theta_up);

/// -(k1 (th1 - ref) + k2 th1dot + k3 e2 + k4 th2dot) with the wrapped
/// pendulum error e2. k2 and k4 switch to their post values from the given
/// first stick times of the arm and the pendulum.
double furuta_feedback(const Vector& q, const Vector& v, double t,
                       const FurutaCtrlParams& p,
                       double t_stick1 = std::numeric_limits<double>::infinity(),
                       double t_stick2 = std::numeric_limits<double>::infinity());

struct FurutaImpulse {
  double U_tau;
  double dv1;
};

/// Arm torque impulse that changes the pendulum rate by dv2 while the
/// pendulum joint itself receives no impulse. Throws NumericalError when
/// |cos theta2| < 1e-9.
FurutaImpulse furuta_impulse_torque(double theta2, double dv2,
                                    const FurutaParams& plant);

/// `steps_since_impulse` counts accepted steps since the last impulse.
bool furuta_impulse_active(const Vector& q, const Vector& v_minus,
                           const FurutaCtrlParams& p, double tol_v,
                           int steps_since_impulse);

/// theta_up + 2 pi i with i = floor(theta2 / 2 pi).
double furuta_shoot_target(double theta2, const FurutaCtrlParams& p);

/// -sign(e) sqrt(10 |e|) with e = theta2 - furuta_shoot_target(theta2).
double furuta_shoot_initial_guess(double theta2, const FurutaCtrlParams& p);

class FurutaController;

/// Shooting on the post-impulse pendulum rate so that theta2 reaches
/// furuta_shoot_target after p.T_shoot. Each probe applies the
/// matching arm impulse to `state` and simulates `feedback` (which must have
/// impulses disabled) for p.T_shoot. The result holds the best s even when
/// not converged.
ShootResult shoot_furuta(const FurutaModel& model, const State& state,
                         const StepperConfig& cfg,
                         const FurutaController& feedback);

class FurutaController final : public Controller {
 public:
  explicit FurutaController(FurutaCtrlParams p);

  Vector force(const MechanicalModel& model, const State& mid) const override;
  std::optional<ControlEvent> after_step(const MechanicalModel& model,
                                         const StepperConfig& cfg, State& state,
                                         const ImpulseSolveReport& report) override;
  std::unique_ptr<Controller> clone() const override;

  const FurutaCtrlParams& params() const { return p_; }
  std::unique_ptr<FurutaController> feedback_only() const;

 private:
  FurutaCtrlParams p_;
  std::optional<double> t_stick1_;
  std::optional<double> t_stick2_;
  int since_impulse_ = std::numeric_limits<int>::max();
};

}  // namespace nsmech
