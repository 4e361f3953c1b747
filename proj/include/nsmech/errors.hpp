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

#include <stdexcept>
#include <string>

namespace nsmech {

/// Invalid model, stepper or controller parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A single-valued force law was asked to evaluate a set-valued point
/// (e.g. Coulomb friction at zero sliding velocity).
class SetValuedCaseError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Singular mass matrix or another linear-algebra breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An impulse estimator (BVP Newton, shooting) failed to produce an estimate.
class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario file or inconsistent scenario content.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nsmech
