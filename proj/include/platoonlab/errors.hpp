/*
 * Copyright 2026 The platoonlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace platoonlab {

// A theorem hypothesis (M*T < 1, inf v_d > 0) does not hold.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A state component became non-finite during integration.
class NumericBlowup : public std::runtime_error {
 public:
  NumericBlowup(double t, std::size_t vehicle)
      : std::runtime_error("non-finite state at t=" + std::to_string(t) +
                           " for vehicle " + std::to_string(vehicle + 1)),
        time_(t),
        vehicle_(vehicle) {}

  double time() const { return time_; }
  // Zero-based.
  std::size_t vehicle() const { return vehicle_; }

 private:
  double time_;
  std::size_t vehicle_;
};

}  // namespace platoonlab
