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

#include "nsmech/furuta.hpp"

#include <algorithm>
#include <cmath>

#include "nsmech/errors.hpp"

namespace nsmech {

void FurutaParams::validate() const {
  if (!(l1 > 0 && c1 > 0 && l2 > 0 && c2 > 0)) {
    throw ParameterError("furuta: lengths must be > 0");
  }
  if (!(m1 > 0 && m2 > 0 && J1 > 0 && J2 > 0)) {
    throw ParameterError("furuta: masses and inertias must be > 0");
  }
  if (!(R1 > R2 && R2 >= 0)) throw ParameterError("furuta: need R1 > R2 >= 0");
  if (!(mu >= 0)) throw ParameterError("furuta: mu must be >= 0");
  if (!(lamB1_static >= 0 && lamB2_static >= 0)) {
    throw ParameterError("furuta: static normal forces must be >= 0");
  }
  if (!(g > 0)) throw ParameterError("furuta: g must be > 0");
  if ((R_E1 && !(*R_E1 >= 0)) || (R_E2 && !(*R_E2 >= 0))) {
    throw ParameterError("furuta: equivalent arm overrides must be >= 0");
  }
}

double equivalent_arm(double R1, double R2) {
  if (!(R1 > R2 && R2 >= 0.0)) {
    throw ParameterError("equivalent_arm: need R1 > R2 >= 0");
  }
  return 2.0 * (R1 * R1 * R1 - R2 * R2 * R2) / (3.0 * (R1 * R1 - R2 * R2));
}

Matrix furuta_mass_matrix(double theta2, const FurutaParams& p) {
  const double s = std::sin(theta2);
  const double j2 = p.J2 + p.m2 * p.c2 * p.c2;
  Matrix M(2, 2);
  M(0, 0) = p.J1 + p.m1 * p.c1 * p.c1 + p.m2 * p.l1 * p.l1 + j2 * s * s;
  M(0, 1) = p.m2 * p.l1 * p.c2 * std::cos(theta2);
  M(1, 0) = M(0, 1);
  M(1, 1) = j2;
  return M;
}

Vector furuta_h_vector(const Vector& theta, const Vector& thetadot,
                       const FurutaParams& p) {
  const double th2 = theta[1];
  const double w1 = thetadot[0];
  const double w2 = thetadot[1];
  const double j2 = p.m2 * p.c2 * p.c2 + p.J2;
  const double s2 = std::sin(2.0 * th2);
  Vector h(2);
  h[0] = w2 * w2 * p.m2 * p.l1 * p.c2 * std::sin(th2) - w1 * w2 * s2 * j2;
  h[1] = 0.5 * w1 * w1 * s2 * j2 - p.g * p.m2 * p.c2 * std::sin(th2);
  return h;
}

std::pair<double, double> furuta_normal_forces(double theta2, double thetadot1,
                                               double thetadot2,
                                               const FurutaParams& p) {
  const double n1 =
      (p.m1 + p.m2) * p.g + p.m2 * p.c2 * thetadot2 * thetadot2 * std::cos(theta2);
  const double n2 = p.m2 * p.l1 * thetadot1 * thetadot1;
  return {std::max(std::abs(n1), p.lamB1_static),
          std::max(std::abs(n2), p.lamB2_static)};
}

FurutaModel::FurutaModel(FurutaParams p) : p_(std::move(p)) {
  p_.validate();
  const double re = equivalent_arm(p_.R1, p_.R2);
  re1_ = p_.R_E1.value_or(re);
  re2_ = p_.R_E2.value_or(re);
}

Matrix FurutaModel::mass_matrix(const Vector& q) const {
  return furuta_mass_matrix(q[1], p_);
}

Vector FurutaModel::smooth_forces(const Vector& q, const Vector& v,
                                  double /*t*/) const {
  return furuta_h_vector(q, v, p_);
}

Matrix FurutaModel::constraint_matrix(const Vector& /*q*/) const {
  return Matrix::Identity(2, 2);
}

std::vector<ConstraintLaw> FurutaModel::constraint_sets(const State& state,
                                                        double dt,
                                                        double /*gamma*/) const {
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  const double th2_mid = state.q[1] + 0.5 * dt * state.v[1];
  const auto [lam1, lam2] =
      furuta_normal_forces(th2_mid, state.v[0], state.v[1], p_);
  return {ConvexSet::disc(p_.mu * lam1 * re1_ * dt),
          ConvexSet::disc(p_.mu * lam2 * re2_ * dt)};
}

Vector FurutaModel::input_direction(const Vector& /*q*/) const {
  Vector w(2);
  w << 1.0, 0.0;
  return w;
}

double FurutaModel::energy(const State& s) const {
  const Matrix M = mass_matrix(s.q);
  return 0.5 * s.v.dot(M * s.v) +
         p_.g * p_.m2 * p_.c2 * (1.0 - std::cos(s.q[1]));
}

}  // namespace nsmech
