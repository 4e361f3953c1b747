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

#include "nsmech/oscillator.hpp"

#include <cmath>

#include "nsmech/errors.hpp"

namespace nsmech {

void OscillatorParams::validate() const {
  if (!(m > 0.0)) throw ParameterError("oscillator: m must be > 0");
  if (!(g > 0.0)) throw ParameterError("oscillator: g must be > 0");
  if (!(k1 > 0.0)) throw ParameterError("oscillator: k1 must be > 0");
  if (!(k2 >= 0.0)) throw ParameterError("oscillator: k2 must be >= 0");
  if (!(mu1 >= mu2 && mu2 >= mu3 && mu3 >= 0.0)) {
    throw ParameterError("oscillator: need mu1 >= mu2 >= mu3 >= 0");
  }
  if (!(v_half >= 0.0)) throw ParameterError("oscillator: v_half must be >= 0");
  if (!std::isfinite(Omega)) throw ParameterError("oscillator: Omega must be finite");
}

double friction_coefficient(double /*qx*/, double vx, double t,
                            const OscillatorParams& p) {
  return (p.mu1 - p.mu2) / (1.0 + p.v_half * std::abs(vx)) + p.mu2 +
         p.mu3 * std::sin(p.Omega * t);
}

bool stick_band(double qx, double t, const OscillatorParams& p) {
  return std::abs(p.k1 * qx) <= friction_coefficient(qx, 0.0, t, p) * p.m * p.g;
}

namespace {

// The controlled plant runs with k1 = 0, so only the physical bounds apply.
void check_plant(const OscillatorParams& p) {
  if (!(p.m > 0.0 && p.g > 0.0 && p.k1 >= 0.0 && p.k2 >= 0.0)) {
    throw ParameterError("oscillator: invalid mass, gravity or spring data");
  }
  if (!(p.mu1 >= p.mu2 && p.mu2 >= p.mu3 && p.mu3 >= 0.0)) {
    throw ParameterError("oscillator: need mu1 >= mu2 >= mu3 >= 0");
  }
}

}  // namespace

OscillatorModel::OscillatorModel(OscillatorParams p) : p_(p) { check_plant(p_); }

Matrix OscillatorModel::mass_matrix(const Vector& /*q*/) const {
  return Matrix::Identity(2, 2) * p_.m;
}

Vector OscillatorModel::smooth_forces(const Vector& q, const Vector& v,
                                      double /*t*/) const {
  Vector h(2);
  h << -p_.k1 * q[0] - p_.k2 * v[0], -p_.m * p_.g;
  return h;
}

Matrix OscillatorModel::constraint_matrix(const Vector& /*q*/) const {
  Matrix w(2, 2);
  w << 0.0, 1.0,
       1.0, 0.0;
  return w;
}

std::vector<ConstraintLaw> OscillatorModel::constraint_sets(
    const State& state, double dt, double gamma) const {
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  const double q_pred = state.q[1] + gamma * state.v[1] * dt;
  if (q_pred > 0.0) return {std::nullopt, std::nullopt};
  const double mu = friction_coefficient(state.q[0], state.v[0], state.t, p_);
  return {ConvexSet::non_neg_half_line(), ConvexSet::disc(mu * p_.m * p_.g * dt)};
}

Vector OscillatorModel::initial_impulses(const State& state, double dt,
                                         double gamma) const {
  Vector lambda = Vector::Zero(2);
  if (state.q[1] + gamma * state.v[1] * dt <= 0.0) lambda[0] = p_.m * p_.g * dt;
  return lambda;
}

Vector OscillatorModel::input_direction(const Vector& /*q*/) const {
  Vector w(2);
  w << 1.0, 0.0;
  return w;
}

double OscillatorModel::energy(const State& s) const {
  return 0.5 * p_.m * s.v.squaredNorm() + 0.5 * p_.k1 * s.q[0] * s.q[0] +
         p_.m * p_.g * s.q[1];
}

ReducedOscillatorModel::ReducedOscillatorModel(OscillatorParams p) : p_(p) {
  check_plant(p_);
}

Matrix ReducedOscillatorModel::mass_matrix(const Vector& /*q*/) const {
  return Matrix::Identity(1, 1) * p_.m;
}

Vector ReducedOscillatorModel::smooth_forces(const Vector& q, const Vector& v,
                                             double /*t*/) const {
  Vector h(1);
  h << -p_.k1 * q[0] - p_.k2 * v[0];
  return h;
}

Matrix ReducedOscillatorModel::constraint_matrix(const Vector& /*q*/) const {
  return Matrix::Identity(1, 1);
}

std::vector<ConstraintLaw> ReducedOscillatorModel::constraint_sets(
    const State& state, double dt, double /*gamma*/) const {
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  const double mu = friction_coefficient(state.q[0], state.v[0], state.t, p_);
  return {ConvexSet::disc(mu * p_.m * p_.g * dt)};
}

Vector ReducedOscillatorModel::input_direction(const Vector& /*q*/) const {
  return Vector::Ones(1);
}

double ReducedOscillatorModel::energy(const State& s) const {
  return 0.5 * p_.m * s.v[0] * s.v[0] + 0.5 * p_.k1 * s.q[0] * s.q[0];
}

}  // namespace nsmech
