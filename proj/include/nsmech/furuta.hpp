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

// Rotary inverted pendulum with friction plates in both joints.
// q = (theta1, theta2): arm angle about the vertical axis and pendulum angle
// measured from the hanging position. Both joint friction moments are
// constraints (W = I) and the motor torque acts on the arm.

#include <optional>
#include <utility>
#include <vector>

#include "nsmech/model.hpp"

namespace nsmech {

struct FurutaParams {
  double l1 = 0.435;
  double c1 = 0.217;
  double l2 = 0.2;
  double c2 = 0.19;
  double m1 = 0.4;
  double m2 = 0.55;
  double J1 = 0.027;
  double J2 = 0.021;
  double R1 = 0.08;
  double R2 = 0.03;
  double mu = 0.25;
  double lamB1_static = 12.0;
  double lamB2_static = 3.0;
  double g = 9.81;
  /// Per-joint equivalent arm overrides; the plate geometry is used if unset.
  std::optional<double> R_E1;
  std::optional<double> R_E2;

  void validate() const;
};

/// 2 (R1^3 - R2^3) / (3 (R1^2 - R2^2)). Throws ParameterError unless
/// R1 > R2 >= 0.
double equivalent_arm(double R1, double R2);

Matrix furuta_mass_matrix(double theta2, const FurutaParams& p);

Vector furuta_h_vector(const Vector& theta, const Vector& thetadot,
                       const FurutaParams& p);

/// Clamped normal forces (lamB1, lamB2) on the two friction plates.
std::pair<double, double> furuta_normal_forces(double theta2, double thetadot1,
                                               double thetadot2,
                                               const FurutaParams& p);

class FurutaModel final : public MechanicalModel {
 public:
  explicit FurutaModel(FurutaParams p);

  const FurutaParams& params() const { return p_; }
  double arm1() const { return re1_; }
  double arm2() const { return re2_; }

  int dof() const override { return 2; }
  int num_constraints() const override { return 2; }
  Matrix mass_matrix(const Vector& q) const override;
  Vector smooth_forces(const Vector& q, const Vector& v,
                       double t) const override;
  Matrix constraint_matrix(const Vector& q) const override;
  /// Disc radii mu lamB_i R_E dt with lamB from the midpoint configuration
  /// and the start velocity.
  std::vector<ConstraintLaw> constraint_sets(const State& state, double dt,
                                             double gamma) const override;
  Vector input_direction(const Vector& q) const override;
  /// 1/2 v^T M v + g m2 c2 (1 - cos theta2).
  double energy(const State& state) const override;

 private:
  FurutaParams p_;
  double re1_;
  double re2_;
};

}  // namespace nsmech
