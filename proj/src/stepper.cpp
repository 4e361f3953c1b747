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

#include "nsmech/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include <Eigen/Cholesky>

#include "nsmech/errors.hpp"

namespace nsmech {
namespace {

Eigen::LDLT<Matrix> factorize(const Matrix& mass) {
  Eigen::LDLT<Matrix> ldlt(mass);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      (ldlt.vectorD().array() <= 0.0).any()) {
    throw NumericalError("mass matrix is not positive definite");
  }
  return ldlt;
}

struct SolveOutput {
  ImpulseSolveReport report;
  Vector v_plus;
};

SolveOutput solve_impl(const MechanicalModel& model, const State& state,
                       const StepperConfig& cfg, const Vector& u) {
  const int n = model.dof();
  const int m = model.num_constraints();
  if (u.size() != n) {
    throw ParameterError("control force has wrong dimension");
  }

  const Vector q_mid = midpoint_config(state, cfg.dt);
  const auto ldlt = factorize(model.mass_matrix(q_mid));
  const Vector h = model.smooth_forces(q_mid, state.v, state.t);

  SolveOutput out;
  ImpulseSolveReport& rep = out.report;
  out.v_plus = state.v + ldlt.solve((h + u) * cfg.dt);
  rep.impulses = Vector::Zero(m);
  rep.modes.assign(static_cast<std::size_t>(m), ImpulseMode::kOpen);
  rep.iterations = 1;
  if (m == 0) {
    rep.gdot_plus = Vector::Zero(0);
    return out;
  }

  const Matrix W = model.constraint_matrix(q_mid);
  const auto laws = model.constraint_sets(state, cfg.dt, cfg.gamma);
  if (W.rows() != n || W.cols() != m || static_cast<int>(laws.size()) != m) {
    throw ParameterError("model constraint data has inconsistent dimensions");
  }

  const bool any_active =
      std::any_of(laws.begin(), laws.end(), [](const auto& l) { return l.has_value(); });
  if (!any_active) {
    rep.gdot_plus = W.transpose() * out.v_plus;
    return out;
  }

  const Matrix B = ldlt.solve(W);
  std::vector<double> r(static_cast<std::size_t>(m), 1.0);
  for (int k = 0; k < m; ++k) {
    if (!cfg.r_init.empty()) {
      r[k] = cfg.r_init[k];
    } else {
      const double g_kk = W.col(k).dot(B.col(k));
      r[k] = g_kk > 0.0 ? 1.0 / g_kk : 1.0;
    }
  }

  Vector gdot_minus;
  if (cfg.restitution > 0.0) gdot_minus = W.transpose() * state.v;

  Vector& lambda = rep.impulses;
  lambda = model.initial_impulses(state, cfg.dt, cfg.gamma);
  for (int k = 0; k < m; ++k) {
    if (!laws[k]) lambda[k] = 0.0;
  }
  out.v_plus += B * lambda;

  std::vector<ProxBranch> branch(static_cast<std::size_t>(m), ProxBranch::kInterior);
  rep.converged = false;
  for (int j = 1; j <= 2 * cfg.j_max; ++j) {
    double sigma = 0.0;
    for (int k = 0; k < m; ++k) {
      if (!laws[k]) continue;
      const ConvexSet& set = *laws[k];
      double gdot = W.col(k).dot(out.v_plus);
      if (cfg.restitution > 0.0 && set.kind() == SetKind::kNonNegHalfLine) {
        gdot += cfg.restitution * gdot_minus[k];
      }
      const double arg = lambda[k] - r[k] * gdot;
      branch[k] = set.contains(arg) ? ProxBranch::kInterior : ProxBranch::kBoundary;
      const double delta = prox(arg, set) - lambda[k];
      if (delta != 0.0) {
        out.v_plus += B.col(k) * delta;
        lambda[k] += delta;
      }
      sigma = std::max(sigma, std::abs(delta));
    }
    rep.iterations = j;
    rep.residual_norm = sigma;
    if (sigma < cfg.tol) {
      rep.converged = true;
      break;
    }
    if (j == cfg.j_max && !rep.r_modified) {
      for (double& rk : r) rk *= 0.5;
      rep.r_modified = true;
    }
  }

  rep.gdot_plus = W.transpose() * out.v_plus;
  for (int k = 0; k < m; ++k) {
    if (!laws[k]) continue;
    const ConvexSet& set = *laws[k];
    if (branch[k] == ProxBranch::kInterior) {
      rep.modes[k] = ImpulseMode::kStick;
    } else if (set.kind() == SetKind::kDisc) {
      const double g = rep.gdot_plus[k];
      const bool positive = g != 0.0 ? g > 0.0 : lambda[k] < 0.0;
      rep.modes[k] = positive ? ImpulseMode::kSlipPos : ImpulseMode::kSlipNeg;
    } else {
      rep.modes[k] = ImpulseMode::kOpen;
    }
  }
  return out;
}

template <typename Observer>
RunResult run_loop(const MechanicalModel& model, const State& state0,
                   double t_end, const StepperConfig& cfg,
                   Controller* controller, Observer&& observe) {
  cfg.validate();
  if (state0.q.size() != model.dof() || state0.v.size() != model.dof()) {
    throw ParameterError("initial state has wrong dimension");
  }
  if (!(t_end >= state0.t)) {
    throw ParameterError("t_end must not precede the initial time");
  }
  const long steps = std::lround((t_end - state0.t) / cfg.dt);
  const Vector zero = Vector::Zero(model.dof());

  RunResult res;
  State s = state0;
  for (long k = 0; k < steps; ++k) {
    Vector u = zero;
    if (controller != nullptr) {
      const State mid{midpoint_config(s, cfg.dt), s.v, s.t};
      u = controller->force(model, mid);
    }
    auto [next, rep] = step(model, s, cfg, u);
    next.t = state0.t + static_cast<double>(k + 1) * cfg.dt;
    if (!next.finite()) {
      throw NumericalError("non-finite state at t = " + std::to_string(next.t));
    }
    if (!rep.converged) ++res.nonconverged_steps;
    res.max_iterations = std::max(res.max_iterations, rep.iterations);

    std::optional<ControlEvent> event;
    if (controller != nullptr) {
      event = controller->after_step(model, cfg, next, rep);
    }
    observe(next, std::move(rep), event);
    if (event) res.events.push_back(std::move(*event));
    s = std::move(next);
  }
  res.final_state = std::move(s);
  res.steps = steps;
  return res;
}

}  // namespace

void StepperConfig::validate() const {
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  if (!(tol > 0.0)) throw ParameterError("tol must be > 0");
  if (j_max < 1) throw ParameterError("j_max must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in [0, 1]");
  if (!(restitution >= 0.0 && restitution <= 1.0)) {
    throw ParameterError("restitution must lie in [0, 1]");
  }
  if (!(tol_v >= 0.0)) throw ParameterError("tol_v must be >= 0");
  for (double r : r_init) {
    if (!(r > 0.0)) throw ParameterError("prox parameters r must be > 0");
  }
}

std::string_view to_string(ImpulseMode mode) {
  switch (mode) {
    case ImpulseMode::kStick:
      return "stick";
    case ImpulseMode::kSlipPos:
      return "slip+";
    case ImpulseMode::kSlipNeg:
      return "slip-";
    case ImpulseMode::kOpen:
      return "open";
  }
  return "unknown";
}

std::string_view to_string(ControlEventKind kind) {
  switch (kind) {
    case ControlEventKind::kImpulseOsc:
      return "impulse_osc";
    case ControlEventKind::kImpulseFuruta:
      return "impulse_furuta";
  }
  return "unknown";
}

Vector MechanicalModel::initial_impulses(const State& /*state*/, double /*dt*/,
                                         double /*gamma*/) const {
  return Vector::Zero(num_constraints());
}

Vector midpoint_config(const State& state, double dt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  return state.q + (0.5 * dt) * state.v;
}

ImpulseSolveReport solve_impulses(const MechanicalModel& model,
                                  const State& state, const StepperConfig& cfg,
                                  const Vector& u) {
  cfg.validate();
  if (!cfg.r_init.empty() &&
      static_cast<int>(cfg.r_init.size()) != model.num_constraints()) {
    throw ParameterError("r_init must have one entry per constraint");
  }
  return solve_impl(model, state, cfg, u).report;
}

std::pair<State, ImpulseSolveReport> step(const MechanicalModel& model,
                                          const State& state,
                                          const StepperConfig& cfg,
                                          const Vector& controller_force) {
  auto out = solve_impl(model, state, cfg, controller_force);
  State next;
  next.q = state.q + (0.5 * cfg.dt) * (state.v + out.v_plus);
  next.v = std::move(out.v_plus);
  next.t = state.t + cfg.dt;
  return {std::move(next), std::move(out.report)};
}

State apply_velocity_jump(const MechanicalModel& model, const State& state,
                          const Vector& generalized_impulse) {
  if (generalized_impulse.size() != model.dof()) {
    throw ParameterError("impulse has wrong dimension");
  }
  const auto ldlt = factorize(model.mass_matrix(state.q));
  State out = state;
  out.v += ldlt.solve(generalized_impulse);
  return out;
}

Trajectory integrate(const MechanicalModel& model, const State& state0,
                     double t_end, const StepperConfig& cfg,
                     Controller* controller) {
  Trajectory traj;
  traj.states.push_back(state0);
  auto run = run_loop(model, state0, t_end, cfg, controller,
                      [&](const State& s, ImpulseSolveReport&& rep,
                          const std::optional<ControlEvent>&) {
                        traj.states.push_back(s);
                        traj.reports.push_back(std::move(rep));
                      });
  traj.events = std::move(run.events);
  traj.nonconverged_steps = run.nonconverged_steps;
  traj.max_iterations = run.max_iterations;
  return traj;
}

RunResult advance(const MechanicalModel& model, const State& state0,
                  double t_end, const StepperConfig& cfg,
                  Controller* controller) {
  return run_loop(model, state0, t_end, cfg, controller,
                  [](const State&, ImpulseSolveReport&&,
                     const std::optional<ControlEvent>&) {});
}

RunResult advance(const MechanicalModel& model, const State& state0,
                  double t_end, const StepperConfig& cfg,
                  Controller* controller, const StepObserver& observer) {
  return run_loop(model, state0, t_end, cfg, controller,
                  [&](const State& s, ImpulseSolveReport&& rep,
                      const std::optional<ControlEvent>& event) {
                    observer(s, rep, event ? &*event : nullptr);
                  });
}

void write_trajectory_header(std::ostream& out, int dof, int num_constraints) {
  out << "t";
  for (int i = 0; i < dof; ++i) out << ",q_" << i;
  for (int i = 0; i < dof; ++i) out << ",v_" << i;
  for (int i = 0; i < num_constraints; ++i) out << ",Lambda_" << i;
  out << ",converged\n";
}

void write_trajectory_row(std::ostream& out, const State& s,
                          const ImpulseSolveReport* report, int num_constraints) {
  const auto flags = out.flags();
  const auto precision = out.precision(15);
  out << s.t;
  for (Eigen::Index i = 0; i < s.q.size(); ++i) out << ',' << s.q[i];
  for (Eigen::Index i = 0; i < s.v.size(); ++i) out << ',' << s.v[i];
  for (int i = 0; i < num_constraints; ++i) {
    out << ',';
    if (report != nullptr) {
      out << report->impulses[i];
    } else {
      out << '0';
    }
  }
  out << ',' << (report == nullptr || report->converged ? 1 : 0) << '\n';
  out.precision(precision);
  out.flags(flags);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  if (traj.states.empty()) return;
  const int n = static_cast<int>(traj.states.front().q.size());
  const int m = traj.reports.empty()
                    ? 0
                    : static_cast<int>(traj.reports.front().impulses.size());
  write_trajectory_header(out, n, m);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    write_trajectory_row(out, traj.states[k], k == 0 ? nullptr : &traj.reports[k - 1], m);
  }
}

void write_events_csv(std::ostream& out, const std::vector<ControlEvent>& events,
                      int dof) {
  out << "t,kind,impulse";
  for (int i = 0; i < dof; ++i) out << ",pre_v_" << i;
  for (int i = 0; i < dof; ++i) out << ",post_v_" << i;
  out << ",estimator_iters\n";
  out << std::setprecision(15);
  for (const auto& e : events) {
    out << e.t << ',' << to_string(e.kind) << ',' << e.impulse;
    for (int i = 0; i < dof; ++i) out << ',' << e.pre_v[i];
    for (int i = 0; i < dof; ++i) out << ',' << e.post_v[i];
    out << ',' << e.estimator_iters << '\n';
  }
}

}  // namespace nsmech
