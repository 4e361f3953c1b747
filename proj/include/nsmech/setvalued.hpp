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

// Proximal-point operators for the convex sets that encode contact and
// friction laws, and the residual whose roots are exactly the admissible
// (velocity, impulse) pairs of those laws.

#include <cstdint>
#include <string_view>

namespace nsmech {

enum class SetKind : std::uint8_t {
  kFullLine,        // bilateral constraint, C = R
  kNonNegHalfLine,  // unilateral contact,   C = {x >= 0}
  kDisc,            // Coulomb friction,     C = {|x| <= radius}
};

std::string_view to_string(SetKind kind);

/// One of the three convex sets. Construct through the named factories so the
/// radius invariant (present iff Disc, non-negative) always holds.
class ConvexSet {
 public:
  static ConvexSet full_line() { return ConvexSet(SetKind::kFullLine, 0.0); }
  static ConvexSet non_neg_half_line() {
    return ConvexSet(SetKind::kNonNegHalfLine, 0.0);
  }
  /// Throws ParameterError for a negative or non-finite radius.
  static ConvexSet disc(double radius);

  SetKind kind() const { return kind_; }
  /// Zero for the non-disc kinds.
  double radius() const { return radius_; }

  bool contains(double x) const;

  friend bool operator==(const ConvexSet&, const ConvexSet&) = default;

 private:
  ConvexSet(SetKind kind, double radius) : kind_(kind), radius_(radius) {}

  SetKind kind_;
  double radius_;
};

/// Nearest point of `set` to `x`. Disc ties at |x| == radius return x.
double prox(double x, const ConvexSet& set);

enum class ProxBranch : std::uint8_t { kInterior, kBoundary };

struct ProxResidual {
  ProxBranch branch;
  double value;
};

/// Evaluates f(lambda, gdot) = lambda - prox_C(lambda - r * gdot) and reports
/// which side of the case split was taken. In the interior branch the value
/// is r * gdot; on the boundary it is lambda minus the projected point.
/// Throws ParameterError if r <= 0.
ProxResidual prox_residual(double lambda, double gdot, double r,
                           const ConvexSet& set);

/// Sliding branch of Coulomb's law: -sign(gdot_t) * mu * |lambda_n|.
/// Throws SetValuedCaseError when gdot_t == 0 (use prox_residual there) and
/// ParameterError when mu < 0.
double coulomb_sliding_force(double gdot_t, double mu, double lambda_n);

}  // namespace nsmech
