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

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include "nsmech/errors.hpp"
#include "nsmech/furuta.hpp"
#include "nsmech/oscillator.hpp"
#include "nsmech/stepper.hpp"
#include "nsmech/verify.hpp"
#include "test_models.hpp"

namespace nsmech {
namespace {

using testing::vec;

StepperConfig config(double dt = 1e-3) {
  StepperConfig cfg;
  cfg.dt = dt;
  return cfg;
}

TEST(Midpoint, Examples) {
  EXPECT_DOUBLE_EQ(midpoint_config(State{vec({0.0}), vec({2.0}), 0.0}, 0.1)[0], 0.1);
  const Vector a = midpoint_config(State{vec({1.0, -1.0}), vec({0.0, 0.0}), 0.0}, 0.01);
  EXPECT_EQ(a, vec({1.0, -1.0}));
  EXPECT_DOUBLE_EQ(midpoint_config(State{vec({-4.0}), vec({-4.0}), 0.0}, 1e-3)[0], -4.002);
  EXPECT_THROW(midpoint_config(State{vec({0.0}), vec({0.0}), 0.0}, 0.0), ParameterError);
}

TEST(StepperConfig, Validation) {
  StepperConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dt = -1.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = StepperConfig{};
  c.gamma = 1.5;
  EXPECT_THROW(c.validate(), ParameterError);
  c = StepperConfig{};
  c.restitution = -0.1;
  EXPECT_THROW(c.validate(), ParameterError);
  c = StepperConfig{};
  c.j_max = 0;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Integrate, ZeroDuration) {
  testing::FreeParticle model(1);
  const State s0{vec({1.0}), vec({2.0}), 0.5};
  const Trajectory tr = integrate(model, s0, 0.5, config(), nullptr);
  ASSERT_EQ(tr.states.size(), 1u);
  EXPECT_TRUE(tr.reports.empty());
}

TEST(Integrate, FreeFlightIsExact) {
  testing::FreeParticle model(3);
  const State s0{vec({1.0, -2.0, 0.25}), vec({0.5, 0.25, -4.0}), 0.0};
  const Trajectory tr = integrate(model, s0, 2.0, config(0.125), nullptr);
  ASSERT_EQ(tr.states.size(), 17u);
  const State& end = tr.states.back();
  EXPECT_EQ(end.q, s0.q + s0.v * 2.0);
  EXPECT_EQ(end.v, s0.v);
  EXPECT_EQ(end.t, 2.0);
}

TEST(SolveImpulses, NoConstraintsOneIteration) {
  testing::FreeParticle model(2);
  const auto rep =
      solve_impulses(model, State{vec({0.0, 0.0}), vec({1.0, 1.0}), 0.0}, config(), vec({0, 0}));
  EXPECT_EQ(rep.impulses.size(), 0);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_TRUE(rep.converged);
}

TEST(SolveImpulses, OscillatorSliding) {
  const OscillatorParams p;
  const OscillatorModel model(p);
  const StepperConfig cfg = config();
  const State s{vec({-4.0, 0.0}), vec({-4.0, 0.0}), 0.0};
  const auto rep = solve_impulses(model, s, cfg, Vector::Zero(2));
  const double mu = (p.mu1 - p.mu2) / (1.0 + p.v_half * 4.0) + p.mu2;
  // Sliding in -x: the impulse pushes in +x with the full disc radius.
  EXPECT_DOUBLE_EQ(rep.impulses[1], mu * p.m * p.g * cfg.dt);
  EXPECT_EQ(rep.modes[1], ImpulseMode::kSlipNeg);
  EXPECT_DOUBLE_EQ(rep.impulses[0], p.m * p.g * cfg.dt);
}

TEST(SolveImpulses, OscillatorSticking) {
  const OscillatorParams p;
  const OscillatorModel model(p);
  const StepperConfig cfg = config();
  const State s{vec({1.0, 0.0}), vec({0.001, 0.0}), 0.0};
  const auto rep = solve_impulses(model, s, cfg, Vector::Zero(2));
  const double qm = 1.0 + 0.5 * cfg.dt * 0.001;
  const double hx = -p.k1 * qm - p.k2 * 0.001;
  EXPECT_NEAR(rep.impulses[1], -p.m * 0.001 - hx * cfg.dt, 1e-16);
  EXPECT_EQ(rep.modes[1], ImpulseMode::kStick);
  EXPECT_NEAR(rep.gdot_plus[1], 0.0, 1e-16);
}

TEST(Step, OscillatorAtRestInsideBandStays) {
  const OscillatorModel model(OscillatorParams{});
  const State s{vec({2.0, 0.0}), vec({0.0, 0.0}), 0.3};
  const auto [next, rep] = step(model, s, config(), Vector::Zero(2));
  EXPECT_NEAR(next.q[0], 2.0, 1e-15);
  EXPECT_EQ(next.q[1], 0.0);
  EXPECT_NEAR(next.v[0], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(next.t, 0.301);
  EXPECT_TRUE(rep.converged);
}

TEST(SolveImpulses, FurutaCoupledStick) {
  const FurutaParams p;
  const FurutaModel model(p);
  const StepperConfig cfg = config();
  const State s{vec({0.0, 0.02}), vec({0.0, 0.0}), 0.0};
  const auto rep = solve_impulses(model, s, cfg, Vector::Zero(2));
  ASSERT_EQ(rep.modes[0], ImpulseMode::kStick);
  ASSERT_EQ(rep.modes[1], ImpulseMode::kStick);
  // Brute-force 2x2 stick candidate with W = I and v = 0.
  const Vector qm = midpoint_config(s, cfg.dt);
  const Vector cand = -(furuta_h_vector(qm, s.v, p) * cfg.dt);
  const auto laws = model.constraint_sets(s, cfg.dt, cfg.gamma);
  for (int k = 0; k < 2; ++k) {
    EXPECT_LE(std::abs(cand[k]), laws[k]->radius());
    EXPECT_NEAR(rep.impulses[k], cand[k], 1e-12);
  }
}

TEST(SolveImpulses, RestitutionOnNormalContact) {
  const OscillatorModel model(OscillatorParams{});
  StepperConfig cfg = config();
  cfg.restitution = 0.5;
  const State s{vec({0.0, 0.0}), vec({0.0, -1.0}), 0.0};
  const auto [next, rep] = step(model, s, cfg, Vector::Zero(2));
  EXPECT_NEAR(next.v[1], 0.5, 1e-12);
  EXPECT_NEAR(next.v[0], 0.0, 1e-15);
}

TEST(SolveImpulses, NonConvergenceIsFlaggedAndApplied) {
  const FurutaModel model(FurutaParams{});
  StepperConfig cfg = config();
  cfg.j_max = 1;
  cfg.tol = 1e-300;
  const State s{vec({0.0, 1.0}), vec({0.3, -2.0}), 0.0};
  const auto [next, rep] = step(model, s, cfg, Vector::Zero(2));
  EXPECT_LE(rep.iterations, 2);
  if (!rep.converged) {
    EXPECT_TRUE(rep.r_modified);
    EXPECT_TRUE(next.finite());
    EXPECT_NE(next.v, s.v);
  }
}

TEST(ApplyVelocityJump, Examples) {
  testing::FreeParticle unit(1);
  const State s{vec({0.3}), vec({-1.0}), 2.0};
  const State same = apply_velocity_jump(unit, s, vec({0.0}));
  EXPECT_EQ(same.v, s.v);
  EXPECT_EQ(same.q, s.q);
  const State kicked = apply_velocity_jump(unit, s, vec({2.5}));
  EXPECT_DOUBLE_EQ(kicked.v[0], 1.5);
  EXPECT_EQ(kicked.t, 2.0);

  const FurutaParams p;
  const FurutaModel model(p);
  const double th2 = 0.7;
  const State f{vec({0.0, th2}), vec({0.0, 0.0}), 0.0};
  const State j = apply_velocity_jump(model, f, vec({0.01, 0.0}));
  const double ratio = -(p.m2 * p.l1 * p.c2 * std::cos(th2)) / (p.m2 * p.c2 * p.c2 + p.J2);
  EXPECT_NEAR(j.v[1], ratio * j.v[0], 1e-15);
}

TEST(ApplyVelocityJump, SingularMass) {
  testing::SingularModel model;
  const State s{vec({0.0, 0.0}), vec({0.0, 0.0}), 0.0};
  EXPECT_THROW(apply_velocity_jump(model, s, vec({1.0, 0.0})), NumericalError);
  EXPECT_THROW(step(model, s, config(), Vector::Zero(2)), NumericalError);
}

TEST(Step, FrictionlessLocalErrorIsSecondOrder) {
  FurutaParams p;
  p.mu = 0.0;
  const FurutaModel model(p);
  const State s{vec({0.0, 1.2}), vec({1.0, 2.0}), 0.0};
  using Quad = std::array<double, 4>;
  auto rhs = [&](const Quad& x, Quad& dx, double) {
    const Vector acc = furuta_mass_matrix(x[1], p).ldlt().solve(
        furuta_h_vector(vec({x[0], x[1]}), vec({x[2], x[3]}), p));
    dx = {x[2], x[3], acc[0], acc[1]};
  };
  auto local_error = [&](double dt) {
    Quad x{0.0, 1.2, 1.0, 2.0};
    namespace odeint = boost::numeric::odeint;
    odeint::integrate_adaptive(
        odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_dopri5<Quad>()), rhs, x,
        0.0, dt, dt / 10);
    const State n = step(model, s, config(dt), Vector::Zero(2)).first;
    return std::max(std::abs(n.q[1] - x[1]), std::abs(n.v[1] - x[3]));
  };
  const double e1 = local_error(2e-3);
  const double e2 = local_error(1e-3);
  EXPECT_LT(e2, 1e-5);
  EXPECT_GT(e1 / e2, 3.0);
}

// Per-step admissibility of every converged report.
void expect_admissible(const MechanicalModel& model, const Trajectory& tr,
                       const StepperConfig& cfg) {
  for (std::size_t k = 0; k < tr.reports.size(); ++k) {
    const auto& rep = tr.reports[k];
    if (!rep.converged) continue;
    const auto laws = model.constraint_sets(tr.states[k], cfg.dt, cfg.gamma);
    for (std::size_t i = 0; i < laws.size(); ++i) {
      if (!laws[i]) {
        EXPECT_EQ(rep.impulses[i], 0.0);
        continue;
      }
      const double lam = rep.impulses[i];
      const double g = rep.gdot_plus[i];
      if (laws[i]->kind() == SetKind::kNonNegHalfLine) {
        EXPECT_GE(lam, 0.0);
        EXPECT_LE(lam * g, 1e-12);
        continue;
      }
      const double rho = laws[i]->radius();
      switch (rep.modes[i]) {
        case ImpulseMode::kStick:
          ASSERT_LE(std::abs(g), cfg.tol_v) << "step " << k << " constraint " << i;
          ASSERT_LE(std::abs(lam), rho * (1 + 1e-12));
          break;
        case ImpulseMode::kSlipPos:
          ASSERT_NEAR(lam, -rho, 1e-15) << "step " << k;
          ASSERT_GE(g, 0.0);
          break;
        case ImpulseMode::kSlipNeg:
          ASSERT_NEAR(lam, rho, 1e-15) << "step " << k;
          ASSERT_LE(g, 0.0);
          break;
        case ImpulseMode::kOpen:
          FAIL() << "disc reported open";
      }
    }
  }
}

TEST(StepperProperty, AdmissibilityOscillator) {
  const OscillatorModel model(OscillatorParams{});
  const StepperConfig cfg = config();
  for (double q0 : {-6.0, -1.0, 3.0}) {
    for (double v0 : {-5.0, 0.0, 4.0}) {
      const Trajectory tr = integrate(model, State{vec({q0, 0.0}), vec({v0, 0.0}), 0.0}, 8.0,
                                      cfg, nullptr);
      EXPECT_EQ(tr.nonconverged_steps, 0);
      expect_admissible(model, tr, cfg);
    }
  }
}

TEST(StepperProperty, AdmissibilityAndCoupledStickFuruta) {
  const FurutaParams p;
  const FurutaModel model(p);
  const StepperConfig cfg = config();
  const State s0{vec({0.0, std::numbers::pi / 2}), vec({0.0, std::numbers::pi}), 0.0};
  const Trajectory tr = integrate(model, s0, 8.0, cfg, nullptr);
  EXPECT_EQ(tr.nonconverged_steps, 0);
  expect_admissible(model, tr, cfg);
  int both_stuck = 0;
  for (std::size_t k = 0; k < tr.reports.size(); ++k) {
    const auto& rep = tr.reports[k];
    if (rep.modes[0] != ImpulseMode::kStick || rep.modes[1] != ImpulseMode::kStick) continue;
    ++both_stuck;
    const State& s = tr.states[k];
    const Vector qm = midpoint_config(s, cfg.dt);
    const Vector cand =
        -(furuta_mass_matrix(qm[1], p) * s.v + furuta_h_vector(qm, s.v, p) * cfg.dt);
    const auto laws = model.constraint_sets(s, cfg.dt, cfg.gamma);
    for (int i = 0; i < 2; ++i) {
      ASSERT_LE(std::abs(cand[i]), laws[i]->radius() * (1 + 1e-9)) << "step " << k;
    }
  }
  EXPECT_GT(both_stuck, 0);
}

TEST(StepperProperty, IterationsBounded) {
  const FurutaModel model(FurutaParams{});
  StepperConfig cfg = config();
  cfg.j_max = 5;
  const Trajectory tr = integrate(
      model, State{vec({0.0, 1.0}), vec({3.0, -4.0}), 0.0}, 6.0, cfg, nullptr);
  EXPECT_LE(tr.max_iterations, 2 * cfg.j_max);
  for (const auto& r : tr.reports) EXPECT_LE(r.iterations, 2 * cfg.j_max);
  EXPECT_EQ(tr.states.size(), 6001u);
}

TEST(StepperProperty, Deterministic) {
  const FurutaModel model(FurutaParams{});
  const State s0{vec({0.0, 2.0}), vec({1.0, 0.0}), 0.0};
  std::ostringstream a;
  std::ostringstream b;
  write_trajectory_csv(a, integrate(model, s0, 3.0, config(), nullptr));
  write_trajectory_csv(b, integrate(model, s0, 3.0, config(), nullptr));
  EXPECT_EQ(a.str(), b.str());
}

TEST(StepperProperty, DissipativeFreeMotion) {
  const OscillatorModel osc(OscillatorParams{});
  for (double q0 : {-6.0, 2.0, 5.0}) {
    const auto rep =
        check_dissipativity(osc, State{vec({q0, 0.0}), vec({-3.0, 0.0}), 0.0}, 10.0, config());
    EXPECT_TRUE(rep.pass) << q0 << ": " << rep.max_increase << " > " << rep.tolerance;
  }
  const FurutaModel fur(FurutaParams{});
  for (double th2 : {-1.5, 0.5, 2.5}) {
    const auto rep =
        check_dissipativity(fur, State{vec({0.0, th2}), vec({1.0, 3.0}), 0.0}, 10.0, config());
    EXPECT_TRUE(rep.pass) << th2 << ": " << rep.max_increase << " > " << rep.tolerance;
  }
}

TEST(StepperProperty, DissipativityCatchesFrictionSignBug) {
  const testing::AntiFrictionOscillator model(OscillatorParams{});
  const auto rep =
      check_dissipativity(model, State{vec({-4.0, 0.0}), vec({-4.0, 0.0}), 0.0}, 7.0, config());
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.violations, 0);
}

TEST(TrajectoryCsv, HeaderAndPrecision) {
  testing::FreeParticle model(2);
  std::ostringstream out;
  write_trajectory_csv(out, integrate(model, State{vec({0.1, 0.2}), vec({1.0 / 3.0, 0.0}), 0.0},
                                      0.002, config(), nullptr));
  std::istringstream in(out.str());
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "t,q_0,q_1,v_0,v_1,converged");
  EXPECT_NE(row.find("0.333333333333333"), std::string::npos);
}

}  // namespace
}  // namespace nsmech
