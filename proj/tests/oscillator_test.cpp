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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nsmech/errors.hpp"
#include "nsmech/oscillator.hpp"
#include "nsmech/stepper.hpp"
#include "test_models.hpp"

namespace nsmech {
namespace {

using testing::vec;

TEST(FrictionCoefficient, Examples) {
  const OscillatorParams p;
  EXPECT_DOUBLE_EQ(friction_coefficient(0.0, 0.0, 0.0, p), 0.4);
  EXPECT_DOUBLE_EQ(friction_coefficient(0.0, 0.0, std::numbers::pi / 8, p), 0.45);
  // Large speed with sin(Omega t) = -1 approaches the lower bound.
  const double t_low = 3.0 * std::numbers::pi / 8;
  EXPECT_NEAR(friction_coefficient(0.0, 1e12, t_low, p), 0.25, 1e-12);
  EXPECT_DOUBLE_EQ(p.mu_lower(), 0.25);
  EXPECT_DOUBLE_EQ(p.mu_upper(), 0.45);
  EXPECT_EQ(friction_coefficient(3.0, 1.5, 0.2, p), friction_coefficient(-7.0, 1.5, 0.2, p));
  EXPECT_EQ(friction_coefficient(0.0, 1.5, 0.2, p), friction_coefficient(0.0, -1.5, 0.2, p));
}

TEST(OscillatorParams, Validation) {
  OscillatorParams p;
  EXPECT_NO_THROW(p.validate());
  p.k1 = 0.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = OscillatorParams{};
  p.mu3 = 0.35;
  EXPECT_THROW(p.validate(), ParameterError);
  p = OscillatorParams{};
  p.m = -1.0;
  EXPECT_THROW(OscillatorModel{p}, ParameterError);
}

TEST(OscillatorModel, SmoothForces) {
  const OscillatorModel model(OscillatorParams{});
  EXPECT_EQ(model.smooth_forces(vec({0, 0}), vec({0, 0}), 0.0), vec({0.0, -10.0}));
  EXPECT_EQ(model.smooth_forces(vec({-4, 0}), vec({-4, 0}), 0.0), vec({6.0, -10.0}));
  OscillatorParams bare;
  bare.k1 = 0.0;
  bare.k2 = 0.0;
  const OscillatorModel plant(bare);
  EXPECT_EQ(plant.smooth_forces(vec({3, 0}), vec({2, 0}), 0.0), vec({0.0, -10.0}));
}

TEST(OscillatorModel, ConstraintSets) {
  const OscillatorModel model(OscillatorParams{});
  const double dt = 1e-3;
  const auto closed = model.constraint_sets(State{vec({0, 0}), vec({0, 0}), 0.0}, dt, 0.5);
  ASSERT_TRUE(closed[0] && closed[1]);
  EXPECT_EQ(closed[0]->kind(), SetKind::kNonNegHalfLine);
  EXPECT_EQ(closed[1]->kind(), SetKind::kDisc);
  EXPECT_DOUBLE_EQ(closed[1]->radius(), 4e-3);
  const auto open = model.constraint_sets(State{vec({0, 1}), vec({0, 0}), 0.0}, dt, 0.5);
  EXPECT_FALSE(open[0]);
  EXPECT_FALSE(open[1]);
  // A contact about to open within the step stays closed only if predicted so.
  const auto leaving = model.constraint_sets(State{vec({0, 0}), vec({0, 1}), 0.0}, dt, 0.5);
  EXPECT_FALSE(leaving[0]);
}

TEST(StickBand, Examples) {
  const OscillatorParams p;
  EXPECT_TRUE(stick_band(0.0, 0.0, p));
  EXPECT_FALSE(stick_band(5.0, 0.0, p));
  EXPECT_FALSE(stick_band(5.0, std::numbers::pi / 8, p));
  EXPECT_TRUE(stick_band(4.0, 0.0, p));
  EXPECT_TRUE(stick_band(-4.0, 0.0, p));
  EXPECT_FALSE(stick_band(4.01, 0.0, p));
}

TEST(OscillatorProperty, ClosedFormTwoCaseOracle) {
  const OscillatorParams p;
  const OscillatorModel model(p);
  StepperConfig cfg;
  cfg.dt = 1e-3;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const double qx = -6.0 + 12.0 * i / 99.0;
      const double vx = -6.0 + 12.0 * j / 99.0;
      const double t = 0.01 * j;
      const auto rep = solve_impulses(model, State{vec({qx, 0}), vec({vx, 0}), t}, cfg,
                                      Vector::Zero(2));
      const double lam_n = p.m * p.g * cfg.dt;
      const double mu = (p.mu1 - p.mu2) / (1.0 + p.v_half * std::abs(vx)) + p.mu2 +
                        p.mu3 * std::sin(p.Omega * t);
      const double hx = -p.k1 * (qx + 0.5 * cfg.dt * vx) - p.k2 * vx;
      const double stick = -p.m * vx - hx * cfg.dt;
      const double rho = mu * lam_n;
      const double lam_t = std::abs(stick) <= rho ? stick : std::copysign(rho, stick);
      worst = std::max({worst, std::abs(rep.impulses[1] - lam_t),
                        std::abs(rep.impulses[0] - lam_n)});
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(OscillatorProperty, ReducedModelIsBitIdentical) {
  const OscillatorParams p;
  const OscillatorModel full(p);
  const ReducedOscillatorModel reduced(p);
  StepperConfig cfg;
  for (double q0 : {-6.0, -4.0, 0.5, 5.0}) {
    for (double v0 : {-6.0, 0.0, 3.0}) {
      const Trajectory a = integrate(full, State{vec({q0, 0}), vec({v0, 0}), 0.0}, 7.0, cfg,
                                     nullptr);
      const Trajectory b =
          integrate(reduced, State{vec({q0}), vec({v0}), 0.0}, 7.0, cfg, nullptr);
      ASSERT_EQ(a.states.size(), b.states.size());
      for (std::size_t k = 0; k < a.states.size(); ++k) {
        ASSERT_EQ(a.states[k].q[0], b.states[k].q[0]) << q0 << ' ' << v0 << " step " << k;
        ASSERT_EQ(a.states[k].v[0], b.states[k].v[0]) << q0 << ' ' << v0 << " step " << k;
      }
    }
  }
}

TEST(OscillatorProperty, NormalChannelStaysTrivial) {
  const OscillatorParams p;
  const OscillatorModel model(p);
  StepperConfig cfg;
  const Trajectory tr = integrate(model, State{vec({-4, 0}), vec({-4, 0}), 0.0}, 7.0, cfg,
                                  nullptr);
  for (std::size_t k = 0; k < tr.reports.size(); ++k) {
    ASSERT_LE(std::abs(tr.states[k + 1].q[1]), 1e-12);
    ASSERT_LE(std::abs(tr.states[k + 1].v[1]), 1e-12);
    ASSERT_NEAR(tr.reports[k].impulses[0], p.m * p.g * cfg.dt, 1e-12);
  }
}

TEST(OscillatorProperty, TerminalStickInBand) {
  const OscillatorParams p;
  const OscillatorModel model(p);
  StepperConfig cfg;
  for (double q0 = -6.0; q0 <= 6.0; q0 += 3.0) {
    for (double v0 = -6.0; v0 <= 6.0; v0 += 3.0) {
      const Trajectory tr =
          integrate(model, State{vec({q0, 0}), vec({v0, 0}), 0.0}, 30.0, cfg, nullptr);
      std::size_t arrival = tr.states.size();
      for (std::size_t k = tr.states.size(); k-- > 0;) {
        if (std::abs(tr.states[k].v[0]) > cfg.tol_v) break;
        arrival = k;
      }
      ASSERT_LT(arrival, tr.states.size()) << q0 << ' ' << v0;
      const State& s = tr.states[arrival];
      const double mu = p.mu1 + p.mu3 * std::sin(p.Omega * s.t);
      EXPECT_LE(std::abs(p.k1 * tr.states.back().q[0]), mu * p.m * p.g) << q0 << ' ' << v0;
    }
  }
}

TEST(OscillatorProperty, TangentialEnergyNonIncreasing) {
  const OscillatorParams p;
  const OscillatorModel model(p);
  StepperConfig cfg;
  const Trajectory tr = integrate(model, State{vec({5, 0}), vec({-2, 0}), 0.0}, 10.0, cfg,
                                  nullptr);
  const double e0 = model.energy(tr.states.front());
  for (std::size_t k = 1; k < tr.states.size(); ++k) {
    const double inc = model.energy(tr.states[k]) - model.energy(tr.states[k - 1]);
    ASSERT_LE(inc, 1e-9 * e0 + 0.1 * cfg.dt * cfg.dt * e0) << "step " << k;
  }
}

}  // namespace
}  // namespace nsmech
