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

// Block on a rough floor pulled by a linear spring-damper. Coordinates are
// q = (x, y) with y the height above the floor; constraint 0 is the normal
// contact and constraint 1 the tangential friction.

#include <vector>

#include "nsmech/model.hpp"

namespace nsmech {

struct OscillatorParams {
  double m = 1.0;
  double g = 10.0;
  double k1 = 1.0;
  double k2 = 0.5;
  double mu1 = 0.4;
  double mu2 = 0.3;
  double mu3 = 0.05;
  double Omega = 4.0;
  double v_half = 0.5;

  void validate() const;

  /// Infimum of the friction coefficient over velocity and time.
  double mu_lower() const { return mu2 - mu3; }
  /// Supremum of the friction coefficient over velocity and time.
  double mu_upper() const { return mu1 + mu3; }
};

/// (mu1 - mu2) / (1 + v_half |vx|) + mu2 + mu3 sin(Omega t). Does not depend
/// on qx.
double friction_coefficient(double qx, double vx, double t,
                            const OscillatorParams& p);

/// True iff |k1 qx| <= mu(qx, 0, t) m g.
bool stick_band(double qx, double t, const OscillatorParams& p);

class OscillatorModel final : public MechanicalModel {
 public:
  explicit OscillatorModel(OscillatorParams p);

  const OscillatorParams& params() const { return p_; }

  int dof() const override { return 2; }
  int num_constraints() const override { return 2; }
  Matrix mass_matrix(const Vector& q) const override;
  Vector smooth_forces(const Vector& q, const Vector& v,
                       double t) const override;
  Matrix constraint_matrix(const Vector& q) const override;
  std::vector<ConstraintLaw> constraint_sets(const State& state, double dt,
                                             double gamma) const override;
  /// (m g dt, 0) while the contact is closed.
  Vector initial_impulses(const State& state, double dt,
                          double gamma) const override;
  Vector input_direction(const Vector& q) const override;
  /// 1/2 m |v|^2 + 1/2 k1 x^2 + m g y.
  double energy(const State& state) const override;

 private:
  OscillatorParams p_;
};

/// Tangential channel alone, with the normal force fixed at m g.
class ReducedOscillatorModel final : public MechanicalModel {
 public:
  explicit ReducedOscillatorModel(OscillatorParams p);

  const OscillatorParams& params() const { return p_; }

  int dof() const override { return 1; }
  int num_constraints() const override { return 1; }
  Matrix mass_matrix(const Vector& q) const override;
  Vector smooth_forces(const Vector& q, const Vector& v,
                       double t) const override;
  Matrix constraint_matrix(const Vector& q) const override;
  std::vector<ConstraintLaw> constraint_sets(const State& state, double dt,
                                             double gamma) const override;
  Vector input_direction(const Vector& q) const override;
  double energy(const State& state) const override;

 private:
  OscillatorParams p_;
};

}  // namespace nsmech
