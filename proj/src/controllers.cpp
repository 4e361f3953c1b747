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

#include "nsmech/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nsmech/errors.hpp"

namespace nsmech {

// ---------------------------------------------------------------------------
// Scalar shooting

ShootResult shoot(const std::function<double(double)>& residual, double s0,
                  double ds, double tol, int max_iters, double s_min,
                  double s_max) {
  if (!(ds > 0.0) || !(tol > 0.0) || max_iters < 1 || !(s_min < s_max)) {
    throw ParameterError("shoot: need ds > 0, tol > 0, max_iters >= 1, s_min < s_max");
  }
  ShootResult best;
  best.residual = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  std::optional<double> below;  // last s with residual < 0
  std::optional<double> above;  // last s with residual > 0

  auto eval = [&](double s) {
    const double f = residual(s);
    ++evaluations;
    if (std::isfinite(f)) {
      if (std::abs(f) < std::abs(best.residual)) {
        best.s = s;
        best.residual = f;
      }
      if (f < 0.0) below = s;
      if (f > 0.0) above = s;
    }
    return f;
  };

  double s = std::clamp(s0, s_min, s_max);
  double f = eval(s);
  double last_slope = 1.0;
  int it = 0;
  while (it < max_iters && !(std::abs(best.residual) <= tol)) {
    ++it;
    if (!std::isfinite(f)) {
      // Probe blew up; retreat toward the best finite iterate.
      if (!std::isfinite(best.residual)) break;
      s = 0.5 * (s + best.s);
      f = eval(s);
      continue;
    }
    // Difference backward at the upper bound so probes stay in range.
    const double h = s + ds <= s_max ? ds : -ds;
    const double f1 = eval(s + h);
    if (std::abs(best.residual) <= tol) break;
    double slope = (f1 - f) / h;
    const bool usable = std::isfinite(slope) && slope != 0.0;
    if (usable) {
      last_slope = slope;
    } else {
      slope = last_slope;
    }
    double next = s - f / slope;
    if (below && above) {
      const double lo = std::min(*below, *above);
      const double hi = std::max(*below, *above);
      if (!usable || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    }
    if (!std::isfinite(next)) break;
    s = std::clamp(next, s_min, s_max);
    f = eval(s);
  }
  best.iterations = it;
  best.evaluations = evaluations;
  best.converged = std::abs(best.residual) <= tol;
  return best;
}

// ---------------------------------------------------------------------------
// Oscillator

std::string_view to_string(OscEstimator e) {
  switch (e) {
    case OscEstimator::kRobustBVP:
      return "robust_bvp";
    case OscEstimator::kApprox:
      return "approx";
    case OscEstimator::kShooting:
      return "shooting";
  }
  return "unknown";
}

OscEstimator osc_estimator_from_string(std::string_view name) {
  if (name == "robust_bvp") return OscEstimator::kRobustBVP;
  if (name == "approx") return OscEstimator::kApprox;
  if (name == "shooting") return OscEstimator::kShooting;
  throw ParameterError("unknown oscillator estimator '" + std::string(name) + "'");
}

void OscCtrlParams::validate(const OscillatorParams& plant) const {
  if (!(k1 > 0.0)) throw ParameterError("controller: k1 must be > 0");
  if (!(k2pre >= 0.0 && k2post >= 0.0)) {
    throw ParameterError("controller: k2 gains must be >= 0");
  }
  if (estimator == OscEstimator::kRobustBVP &&
      !(k2post > 2.0 * std::sqrt(plant.m * k1))) {
    throw ParameterError("controller: robust BVP needs k2post > 2 sqrt(m k1)");
  }
  if (lambda_T_max && !(*lambda_T_max > 0.0)) {
    throw ParameterError("controller: lambda_T_max must be > 0");
  }
  if (!(tol_q >= 0.0) || refractory_steps < 0 || bvp_max_iters < 1) {
    throw ParameterError("controller: invalid tolerances");
  }
  if (!(shoot_horizon > 0.0 && shoot_ds > 0.0 && shoot_tol > 0.0) ||
      shoot_max_iters < 1) {
    throw ParameterError("controller: invalid shooting settings");
  }
}

double OscCtrlParams::activation_bound(const OscillatorParams& plant) const {
  return lambda_T_max.value_or(plant.mu_upper() * plant.m * plant.g);
}

double osc_feedback(double qx, double vx, double t, const OscCtrlParams& p,
                    double t_switch) {
  const double k2 = t >= t_switch ? p.k2post : p.k2pre;
  return -p.k1 * qx - k2 * vx;
}

bool osc_impulse_active(double qx, double vx_minus, const OscCtrlParams& p,
                        const OscillatorParams& plant, double tol_v) {
  return std::abs(vx_minus) <= tol_v &&
         std::abs(qx) <= p.activation_bound(plant) / p.k1 &&
         std::abs(qx) > p.tol_q;
}

ReducedDynamics reduced_dynamics(const OscCtrlParams& p,
                                 const OscillatorParams& plant) {
  ReducedDynamics r{};
  r.omega_n = std::sqrt(p.k1 / plant.m);
  r.theta = p.k2post / (2.0 * std::sqrt(plant.m * p.k1));
  const double root = r.theta > 1.0 ? std::sqrt(r.theta * r.theta - 1.0) : 0.0;
  r.lambda1 = -r.omega_n * r.theta + r.omega_n * root;
  r.lambda2 = -r.omega_n * r.theta - r.omega_n * root;
  r.c_lower = plant.g * plant.mu_lower() / (r.omega_n * r.omega_n);
  return r;
}

BvpEstimate robust_bvp_estimate(double qx_star, const OscCtrlParams& p,
                                const OscillatorParams& plant) {
  if (qx_star == 0.0 || !std::isfinite(qx_star)) {
    throw ParameterError("robust_bvp_estimate: qx_star must be finite and nonzero");
  }
  const ReducedDynamics r = reduced_dynamics(p, plant);
  if (!(r.theta > 1.0)) {
    throw ParameterError("robust_bvp_estimate: system is not overdamped");
  }
  if (!(r.c_lower > 0.0)) {
    throw ParameterError("robust_bvp_estimate: lower friction bound must be > 0");
  }
  const double l1 = r.lambda1;
  const double l2 = r.lambda2;
  const double c = r.c_lower;
  // Work in the q < 0 branch and mirror at the end.
  const double target = -std::abs(qx_star);
  auto q_of = [&](double T) {
    return c * (l2 / (l2 - l1) * std::exp(-l1 * T) -
                l1 / (l2 - l1) * std::exp(-l2 * T) - 1.0);
  };
  auto v_of = [&](double T) {
    return c * (l1 * l2 / (l2 - l1)) * (std::exp(-l1 * T) - std::exp(-l2 * T));
  };

  double T = std::sqrt(2.0 * std::abs(qx_star) / (c * r.omega_n * r.omega_n));
  const double ftol = 1e-14 * std::max(1.0, std::abs(qx_star));
  BvpEstimate out;
  bool done = false;
  for (int i = 1; i <= p.bvp_max_iters; ++i) {
    const double f = q_of(T) - target;
    const double fp = -v_of(T);
    out.newton_iters = i;
    if (!(fp < 0.0) || !std::isfinite(f)) {
      throw EstimatorError("robust_bvp_estimate: degenerate Newton step");
    }
    double next = T - f / fp;
    if (!(next > 0.0)) next = 0.5 * T;
    const double step = std::abs(next - T);
    T = next;
    if (std::abs(f) <= ftol || step <= 1e-15 * T) {
      done = true;
      break;
    }
  }
  if (!done) {
    throw EstimatorError("robust_bvp_estimate: Newton did not converge");
  }
  out.t_end = T;
  const double v = v_of(T);
  out.v_plus = qx_star < 0.0 ? v : -v;
  return out;
}

double approx_impulse(double qx, const OscCtrlParams& p,
                      const OscillatorParams& plant) {
  if (qx == 0.0) return 0.0;
  const ReducedDynamics r = reduced_dynamics(p, plant);
  const double mag = std::sqrt(2.0 * r.c_lower * r.omega_n * r.omega_n *
                               plant.m * plant.m * std::abs(qx));
  return qx > 0.0 ? -mag : mag;
}

OscillatorController::OscillatorController(OscCtrlParams p, OscillatorParams plant)
    : p_(std::move(p)), plant_(plant) {
  p_.validate(plant_);
}

Vector OscillatorController::force(const MechanicalModel& model,
                                   const State& mid) const {
  const double t_switch = t1_.value_or(std::numeric_limits<double>::infinity());
  const double u = osc_feedback(mid.q[0], mid.v[0], mid.t, p_, t_switch);
  return model.control_input(mid.q, u);
}

std::unique_ptr<Controller> OscillatorController::clone() const {
  return std::make_unique<OscillatorController>(*this);
}

std::unique_ptr<OscillatorController> OscillatorController::feedback_only() const {
  auto c = std::make_unique<OscillatorController>(*this);
  c->p_.impulses_enabled = false;
  return c;
}

ShootResult shoot_oscillator(const MechanicalModel& model, double qx_star,
                             double t0, const StepperConfig& cfg,
                             const OscCtrlParams& p) {
  if (qx_star == 0.0) throw ParameterError("shoot_oscillator: qx_star must be nonzero");
  OscillatorParams plant;
  if (const auto* m = dynamic_cast<const OscillatorModel*>(&model)) {
    plant = m->params();
  } else if (const auto* r = dynamic_cast<const ReducedOscillatorModel*>(&model)) {
    plant = r->params();
  } else {
    throw ParameterError("shoot_oscillator: model is not an oscillator");
  }
  OscCtrlParams fp = p;
  fp.impulses_enabled = false;
  // k2post is active from the start of every probe.
  fp.k2pre = fp.k2post;
  const OscillatorController feedback(fp, plant);

  auto residual = [&](double s) {
    State x{Vector::Zero(model.dof()), Vector::Zero(model.dof()), t0};
    x.q[0] = qx_star;
    x.v[0] = s;
    auto ctrl = feedback.clone();
    try {
      const RunResult run = advance(model, x, t0 + p.shoot_horizon, cfg, ctrl.get());
      return run.final_state.q[0];
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  double s0;
  try {
    s0 = robust_bvp_estimate(qx_star, fp, plant).v_plus;
  } catch (const std::exception&) {
    s0 = approx_impulse(qx_star, fp, plant) / plant.m;
  }
  ShootResult res = shoot(residual, s0, p.shoot_ds, p.shoot_tol, p.shoot_max_iters);
  if (!res.converged) {
    throw EstimatorError("shoot_oscillator: no convergence, best residual " +
                         std::to_string(res.residual));
  }
  return res;
}

std::optional<ControlEvent> OscillatorController::after_step(
    const MechanicalModel& model, const StepperConfig& cfg, State& state,
    const ImpulseSolveReport& /*report*/) {
  if (since_impulse_ < std::numeric_limits<int>::max()) ++since_impulse_;
  const double qx = state.q[0];
  const double vx = state.v[0];
  if (!t1_ && std::abs(vx) <= cfg.tol_v) t1_ = state.t;
  if (!p_.impulses_enabled || since_impulse_ <= p_.refractory_steps) {
    return std::nullopt;
  }
  if (!osc_impulse_active(qx, vx, p_, plant_, cfg.tol_v)) return std::nullopt;

  ControlEvent ev;
  ev.t = state.t;
  ev.kind = ControlEventKind::kImpulseOsc;
  ev.q = state.q;
  ev.pre_v = state.v;
  ev.estimator = std::string(to_string(p_.estimator));
  double v_plus = 0.0;
  switch (p_.estimator) {
    case OscEstimator::kRobustBVP:
      try {
        const BvpEstimate est = robust_bvp_estimate(qx, p_, plant_);
        v_plus = est.v_plus;
        ev.estimator_iters = est.newton_iters;
      } catch (const EstimatorError&) {
        v_plus = approx_impulse(qx, p_, plant_) / plant_.m;
        ev.estimator = "approx";
        ev.estimator_converged = false;
      }
      break;
    case OscEstimator::kApprox:
      v_plus = approx_impulse(qx, p_, plant_) / plant_.m;
      break;
    case OscEstimator::kShooting: {
      try {
        const ShootResult res = shoot_oscillator(model, qx, state.t, cfg, p_);
        v_plus = res.s;
        ev.estimator_iters = res.iterations;
      } catch (const EstimatorError&) {
        v_plus = approx_impulse(qx, p_, plant_) / plant_.m;
        ev.estimator = "approx";
        ev.estimator_converged = false;
      }
      break;
    }
  }
  const Vector w = model.input_direction(state.q);
  const Matrix M = model.mass_matrix(state.q);
  // U = m (v+ - v-) along the actuated coordinate.
  ev.impulse = M(0, 0) * (v_plus - vx);
  state = apply_velocity_jump(model, state, w * ev.impulse);
  ev.post_v = state.v;
  since_impulse_ = 0;
  return ev;
}

// ---------------------------------------------------------------------------
// Furuta pendulum

void FurutaCtrlParams::validate() const {
  if (!(k1 >= 0 && k2pre >= 0 && k2post >= 0 && k3 >= 0 && k4pre >= 0 &&
        k4post >= 0)) {
    throw ParameterError("furuta controller: gains must be >= 0");
  }
  if (!(T_shoot > 0.0 && ds > 0.0 && tol_shoot > 0.0 && s_max > 0.0) ||
      max_shoot_iters < 1) {
    throw ParameterError("furuta controller: invalid shooting settings");
  }
  if (!(tol_q >= 0.0 && cos_min >= 0.0 && cos_min < 1.0) || refractory_steps < 0) {
    throw ParameterError("furuta controller: invalid activation settings");
  }
  if (!std::isfinite(theta_ref) || !std::isfinite(theta_up)) {
    throw ParameterError("furuta controller: reference angles must be finite");
  }
}

double wrap_pendulum_error(double theta2, double theta_up) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double d = theta2 - theta_up;
  return d - kTwoPi * std::floor((d + std::numbers::pi) / kTwoPi);
}

double furuta_feedback(const Vector& q, const Vector& v, double t,
                       const FurutaCtrlParams& p, double t_stick1,
                       double t_stick2) {
  const double k2 = t >= t_stick1 ? p.k2post : p.k2pre;
  const double k4 = t >= t_stick2 ? p.k4post : p.k4pre;
  const double e2 = wrap_pendulum_error(q[1], p.theta_up);
  return -(p.k1 * (q[0] - p.theta_ref) + k2 * v[0] + p.k3 * e2 + k4 * v[1]);
}

FurutaImpulse furuta_impulse_torque(double theta2, double dv2,
                                    const FurutaParams& plant) {
  const double c = std::cos(theta2);
  if (std::abs(c) < 1e-9) {
    throw NumericalError("furuta_impulse_torque: arm impulse cannot move the pendulum "
                         "at cos(theta2) = 0");
  }
  const Matrix M = furuta_mass_matrix(theta2, plant);
  FurutaImpulse out{};
  out.dv1 = -M(1, 1) / M(0, 1) * dv2;
  out.U_tau = M(0, 0) * out.dv1 + M(0, 1) * dv2;
  return out;
}

bool furuta_impulse_active(const Vector& q, const Vector& v_minus,
                           const FurutaCtrlParams& p, double tol_v,
                           int steps_since_impulse) {
  const bool stuck = std::abs(v_minus[0]) <= tol_v || std::abs(v_minus[1]) <= tol_v;
  return stuck && std::abs(wrap_pendulum_error(q[1], p.theta_up)) > p.tol_q &&
         std::abs(std::cos(q[1])) >= p.cos_min &&
         steps_since_impulse > p.refractory_steps;
}

double furuta_shoot_target(double theta2, const FurutaCtrlParams& p) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  return p.theta_up + kTwoPi * std::floor(theta2 / kTwoPi);
}

double furuta_shoot_initial_guess(double theta2, const FurutaCtrlParams& p) {
  const double e = theta2 - furuta_shoot_target(theta2, p);
  if (e == 0.0) return 0.0;
  return -std::copysign(std::sqrt(10.0 * std::abs(e)), e);
}

FurutaController::FurutaController(FurutaCtrlParams p) : p_(std::move(p)) {
  p_.validate();
}

Vector FurutaController::force(const MechanicalModel& model, const State& mid) const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double u = furuta_feedback(mid.q, mid.v, mid.t, p_, t_stick1_.value_or(kInf),
                                   t_stick2_.value_or(kInf));
  return model.control_input(mid.q, u);
}

std::unique_ptr<Controller> FurutaController::clone() const {
  return std::make_unique<FurutaController>(*this);
}

std::unique_ptr<FurutaController> FurutaController::feedback_only() const {
  auto c = std::make_unique<FurutaController>(*this);
  c->p_.impulses_enabled = false;
  return c;
}

ShootResult shoot_furuta(const FurutaModel& model, const State& state,
                         const StepperConfig& cfg,
                         const FurutaController& feedback) {
  const FurutaCtrlParams& p = feedback.params();
  const double target = furuta_shoot_target(state.q[1], p);
  auto residual = [&](double s) {
    const FurutaImpulse imp =
        furuta_impulse_torque(state.q[1], s - state.v[1], model.params());
    State x = apply_velocity_jump(model, state,
                                  model.input_direction(state.q) * imp.U_tau);
    auto ctrl = feedback.clone();
    try {
      const RunResult run = advance(model, x, state.t + p.T_shoot, cfg, ctrl.get());
      return run.final_state.q[1] - target;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const double s0 = furuta_shoot_initial_guess(state.q[1], p);
  return shoot(residual, s0, p.ds, p.tol_shoot, p.max_shoot_iters, -p.s_max,
               p.s_max);
}

std::optional<ControlEvent> FurutaController::after_step(
    const MechanicalModel& model, const StepperConfig& cfg, State& state,
    const ImpulseSolveReport& /*report*/) {
  if (since_impulse_ < std::numeric_limits<int>::max()) ++since_impulse_;
  if (!t_stick1_ && std::abs(state.v[0]) <= cfg.tol_v) t_stick1_ = state.t;
  if (!t_stick2_ && std::abs(state.v[1]) <= cfg.tol_v) t_stick2_ = state.t;
  if (!p_.impulses_enabled) return std::nullopt;
  if (!furuta_impulse_active(state.q, state.v, p_, cfg.tol_v, since_impulse_)) {
    return std::nullopt;
  }
  const auto* fm = dynamic_cast<const FurutaModel*>(&model);
  if (fm == nullptr) throw ParameterError("FurutaController needs a FurutaModel");

  const auto probe = feedback_only();
  const ShootResult res = shoot_furuta(*fm, state, cfg, *probe);

  ControlEvent ev;
  ev.t = state.t;
  ev.kind = ControlEventKind::kImpulseFuruta;
  ev.q = state.q;
  ev.pre_v = state.v;
  ev.estimator = "shooting";
  ev.estimator_iters = res.iterations;
  ev.estimator_converged = res.converged;
  const FurutaImpulse imp =
      furuta_impulse_torque(state.q[1], res.s - state.v[1], fm->params());
  ev.impulse = imp.U_tau;
  state = apply_velocity_jump(model, state, model.input_direction(state.q) * imp.U_tau);
  ev.post_v = state.v;
  since_impulse_ = 0;
  return ev;
}

}  // namespace nsmech
