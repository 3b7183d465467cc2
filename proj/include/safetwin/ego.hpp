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

#ifndef SAFETWIN__EGO_HPP_
#define SAFETWIN__EGO_HPP_

#include "safetwin/idm.hpp"

#include <optional>
#include <string>
#include <vector>

namespace safetwin
{

/// An object near the ego, positioned in the ego's route coordinate.
/// Stop lines appear with zero length and zero speed.
struct Neighbor
{
  std::string id;
  double route_s = 0.0;  // front position along the ego route, m
  double v = 0.0;
  double a = 0.0;
  double length = 0.0;
  bool frozen = false;
  bool operator==(const Neighbor &) const = default;
};

struct SensorConfig
{
  double range = 150.0;  // L_v, m
  void validate() const;
};

struct VehicleLimits
{
  double mu = 0.7;
  double g = 9.81;
  double a_trac_max = 3.0;
  void validate() const;
  double brake_authority() const { return mu * g; }
  double drive_authority() const;
};

struct DriverParams
{
  double kp = 0.35;
  double ki = 0.02;
  double tau = 0.15;  // actuator time constant, s
  void validate() const;
};

struct PiState
{
  double integral = 0.0;  // integral of speed error, m
};

struct EgoState
{
  std::string id;
  double s = 0.0;  // route arc length of the front bumper
  double v = 0.0;
  double length = 4.5;
  /// Reference speed produced by the IDM layer, integrated at the micro rate.
  double v_ref = 0.0;
  double pedal = 0.0;
  double a_cmd = 0.0;
  double a_actuator = 0.0;
  double a_realized = 0.0;
  PiState pi;
  bool frozen = false;

  /// Cruising state with actuator and controller zeroed; v_ref starts at v.
  static EgoState at(std::string id, double s, double v, double length = 4.5);
};

struct EgoConfig
{
  IdmParams idm;
  SensorConfig sensor;
  VehicleLimits limits;
  DriverParams driver;
  void validate() const;
};

/// Nearest neighbor whose front is ahead of the ego front, returned iff its
/// bumper gap is at most the sensor range.
std::optional<LeaderObservation> sense_leader(
  const EgoState & ego, const std::vector<Neighbor> & neighbors, const SensorConfig & cfg);

/// One explicit-Euler step of the IDM speed: max(0, v + idm_accel(v) dt).
double reference_speed(
  double v, const IdmParams & idm, const std::optional<LeaderObservation> & obs, double dt);

/// PI speed tracker with output saturation to [-1, 1]. The integrator is
/// held while the output saturates.
double pedal_controller(
  double v, double v_ref, PiState & state, const DriverParams & params, double dt);

/// Pedal -> command -> first-order actuator -> friction clamp -> kinematics.
EgoState plant_step(
  EgoState ego, double pedal, const VehicleLimits & limits, const DriverParams & params,
  double dt);

struct EgoTraceRow
{
  double t = 0.0;
  double s = 0.0;
  double v = 0.0;
  double v_ref = 0.0;
  double pedal = 0.0;
  double a_cmd = 0.0;
  double a_realized = 0.0;
  bool operator==(const EgoTraceRow &) const = default;
};

struct MacroAdvance
{
  EgoState state;
  std::vector<EgoTraceRow> trace;
};

/// Number of micro steps per macro step; ConfigError unless the ratio is a
/// positive integer.
long micro_steps_per_macro(double macro_dt, double micro_dt);

/// Runs sense -> reference -> controller -> plant for every micro step of
/// one macro window with the neighbor snapshot held fixed. `t0` stamps the
/// trace; row k is at t0 + (k + 1) micro_dt.
MacroAdvance ego_macro_advance(
  const EgoState & ego, const std::vector<Neighbor> & neighbors, const EgoConfig & cfg,
  double t0, double macro_dt, double micro_dt);

/// CSV columns: t,s,v,v_ref,pedal,a_cmd,a_realized
std::string ego_trace_csv(const std::vector<EgoTraceRow> & rows);

}  // namespace safetwin

#endif  // SAFETWIN__EGO_HPP_
