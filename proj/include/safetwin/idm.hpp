// Copyright 2026 The safetwin Authors
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

#ifndef SAFETWIN__IDM_HPP_
#define SAFETWIN__IDM_HPP_

#include <optional>
#include <string>

namespace safetwin
{

/// Intelligent Driver Model parameters.
struct IdmParams
{
  double desired_speed = 13.89;  // v0, m/s
  double time_headway = 1.5;     // T, s
  double min_gap = 2.0;          // s0, m
  double max_accel = 2.0;        // m/s^2
  double comfort_decel = 2.0;    // b, m/s^2
  double exponent = 4.0;         // delta

  /// Canonical defaults with the given desired speed.
  static IdmParams with_desired_speed(double v0);
  /// Throws ConfigError unless every field is positive and exponent >= 1.
  void validate() const;
};

/// What a follower knows about the object ahead of it.
struct LeaderObservation
{
  std::string leader_id;
  double gap = 0.0;       // bumper to bumper, m
  double leader_v = 0.0;  // m/s
  double leader_a = 0.0;  // m/s^2
  bool operator==(const LeaderObservation &) const = default;
};

inline constexpr double kEmergencyDecel = 9.0;

/// IDM acceleration, clamped to [-emergency_decel, max_accel]:
///
///   a = a_max [1 - (v/v0)^delta - (s*/gap)^2]
///   s* = s0 + max(0, v T + v (v - v_lead) / (2 sqrt(a_max b)))
///
/// Without a leader only the free-road term applies. A non-positive gap
/// returns the emergency floor. Throws DomainError on non-finite input.
double idm_accel(
  double v, const IdmParams & params, const std::optional<LeaderObservation> & obs,
  double emergency_decel = kEmergencyDecel);

/// Desired dynamic gap s*.
double idm_desired_gap(double v, double leader_v, const IdmParams & params);

/// Steady-state bumper gap of a follower travelling at speed v (< v0) behind
/// a leader at the same speed.
double idm_equilibrium_gap(double v, const IdmParams & params);

}  // namespace safetwin

#endif  // SAFETWIN__IDM_HPP_
