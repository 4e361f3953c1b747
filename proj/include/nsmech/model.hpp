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

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "nsmech/setvalued.hpp"

namespace nsmech {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Generalized positions, velocities and clock of a mechanical model.
struct State {
  Vector q;
  Vector v;
  double t = 0.0;

  bool finite() const { return q.allFinite() && v.allFinite() && std::isfinite(t); }
};

/// Law attached to one constraint for the current step. std::nullopt marks an
/// open (inactive) constraint whose impulse is forced to zero.
using ConstraintLaw = std::optional<ConvexSet>;

/// Abstract rigid-body system  M(q) dv = h(q, v, t) dt + W(q) dLambda.
///
/// Implementations are immutable after construction so that independent runs
/// may share one instance across threads.
class MechanicalModel {
 public:
  virtual ~MechanicalModel() = default;

  virtual int dof() const = 0;
  virtual int num_constraints() const = 0;

  /// Symmetric positive-definite n x n.
  virtual Matrix mass_matrix(const Vector& q) const = 0;
  virtual Vector smooth_forces(const Vector& q, const Vector& v,
                               double t) const = 0;
  /// n x m, one column per constraint direction.
  virtual Matrix constraint_matrix(const Vector& q) const = 0;

  /// Impulse-scaled laws for the step starting at `state` (friction radii
  /// already multiplied by dt). `gamma` is the contact-prediction parameter.
  virtual std::vector<ConstraintLaw> constraint_sets(const State& state,
                                                     double dt,
                                                     double gamma) const = 0;

  /// Starting point for the impulse iteration. Zero unless overridden.
  virtual Vector initial_impulses(const State& state, double dt,
                                  double gamma) const;

  /// Generalized direction W_u of the single actuator.
  virtual Vector input_direction(const Vector& q) const = 0;

  /// Total mechanical energy (kinetic + potential).
  virtual double energy(const State& state) const = 0;

  /// Generalized force produced by actuator value `u`.
  Vector control_input(const Vector& q, double u) const {
    return input_direction(q) * u;
  }
};

}  // namespace nsmech
