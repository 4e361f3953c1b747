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

#include "nsmech/setvalued.hpp"

#include <cmath>
#include <string>

#include "nsmech/errors.hpp"

namespace nsmech {

std::string_view to_string(SetKind kind) {
  switch (kind) {
    case SetKind::kFullLine:
      return "full_line";
    case SetKind::kNonNegHalfLine:
      return "non_neg_half_line";
    case SetKind::kDisc:
      return "disc";
  }
  return "unknown";
}

ConvexSet ConvexSet::disc(double radius) {
  if (!std::isfinite(radius) || radius < 0.0) {
    throw ParameterError("disc radius must be finite and >= 0, got " +
                         std::to_string(radius));
  }
  return ConvexSet(SetKind::kDisc, radius);
}

bool ConvexSet::contains(double x) const {
  switch (kind_) {
    case SetKind::kFullLine:
      return true;
    case SetKind::kNonNegHalfLine:
      return x >= 0.0;
    case SetKind::kDisc:
      return std::abs(x) <= radius_;
  }
  return false;
}

double prox(double x, const ConvexSet& set) {
  switch (set.kind()) {
    case SetKind::kFullLine:
      return x;
    case SetKind::kNonNegHalfLine:
      return x >= 0.0 ? x : 0.0;
    case SetKind::kDisc:
      if (std::abs(x) <= set.radius()) return x;
      return std::copysign(set.radius(), x);
  }
  return x;
}

ProxResidual prox_residual(double lambda, double gdot, double r,
                           const ConvexSet& set) {
  if (!(r > 0.0)) {
    throw ParameterError("prox parameter r must be > 0, got " +
                         std::to_string(r));
  }
  const double arg = lambda - r * gdot;
  if (set.contains(arg)) {
    return {ProxBranch::kInterior, r * gdot};
  }
  return {ProxBranch::kBoundary, lambda - prox(arg, set)};
}

double coulomb_sliding_force(double gdot_t, double mu, double lambda_n) {
  if (mu < 0.0) {
    throw ParameterError("friction coefficient must be >= 0");
  }
  if (gdot_t == 0.0) {
    throw SetValuedCaseError(
        "Coulomb friction is set-valued at zero sliding velocity");
  }
  return -std::copysign(1.0, gdot_t) * mu * std::abs(lambda_n);
}

}  // namespace nsmech
