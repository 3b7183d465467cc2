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

#include "safetwin/ego.hpp"

#include "safetwin/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace safetwin
{

void SensorConfig::validate() const
{
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw ConfigError("sensor range must be finite and > 0");
  }
}

void VehicleLimits::validate() const
{
  if (!(mu > 0.0 && mu <= 1.0)) {
    throw ConfigError("friction coefficient must lie in (0, 1]");
  }
  if (!(g > 0.0) || !(a_trac_max > 0.0)) {
    throw ConfigError("gravity and traction limit must be > 0");
  }
}

double VehicleLimits::drive_authority() const { return std::min(a_trac_max, mu * g); }

void DriverParams::validate() const
{
  if (!(kp > 0.0) || !(ki >= 0.0) || !(tau > 0.0)) {
    throw ConfigError("driver gains need kp > 0, ki >= 0, tau > 0");
  }
}

void EgoConfig::validate() const
{
  idm.validate();
  sensor.validate();
  limits.validate();
  driver.validate();
}

EgoState EgoState::at(std::string id, double s, double v, double length)
{
  EgoState e;
  e.id = std::move(id);
  e.s = s;
  e.v = v;
  e.v_ref = v;
  e.length = length;
  return e;
}

std::optional<LeaderObservation> sense_leader(
  const EgoState & ego, const std::vector<Neighbor> & neighbors, const SensorConfig & cfg)
{
  const Neighbor * best = nullptr;
  double best_gap = 0.0;
  for (const auto & n : neighbors) {
    if (n.id == ego.id || !(n.route_s > ego.s)) {
      continue;
    }
    const double gap = n.route_s - n.length - ego.s;
    if (!best || gap < best_gap) {
      best = &n;
      best_gap = gap;
    }
  }
  if (!best || best_gap > cfg.range) {
    return std::nullopt;
  }
  return LeaderObservation{best->id, best_gap, best->v, best->a};
}

double reference_speed(
  double v, const IdmParams & idm, const std::optional<LeaderObservation> & obs, double dt)
{
  if (!(dt > 0.0)) {
    throw DomainError("reference_speed: dt must be > 0");
  }
  return std::max(0.0, v + idm_accel(v, idm, obs) * dt);
}

double pedal_controller(
  double v, double v_ref, PiState & state, const DriverParams & p, double dt)
{
  if (!(dt > 0.0)) {
    throw DomainError("pedal_controller: dt must be > 0");
  }
  const double error = v_ref - v;
  const double candidate = state.integral + error * dt;
  const double u = p.kp * error + p.ki * candidate;
  if (u > 1.0 || u < -1.0) {
    return std::clamp(p.kp * error + p.ki * state.integral, -1.0, 1.0);
  }
  state.integral = candidate;
  return u;
}

EgoState plant_step(
  EgoState ego, double pedal, const VehicleLimits & limits, const DriverParams & params,
  double dt)
{
  if (!(dt > 0.0)) {
    throw DomainError("plant_step: dt must be > 0");
  }
  pedal = std::clamp(pedal, -1.0, 1.0);
  const double brake = limits.brake_authority();
  const double drive = limits.drive_authority();
  ego.pedal = pedal;
  ego.a_cmd = pedal >= 0.0 ? pedal * drive : pedal * brake;
  ego.a_actuator += (ego.a_cmd - ego.a_actuator) * dt / params.tau;
  ego.a_realized = std::clamp(ego.a_actuator, -brake, drive);
  const double a = ego.a_realized;
  double ds = ego.v * dt + 0.5 * a * dt * dt;
  double v = ego.v + a * dt;
  if (v < 0.0) {
    ds = a < 0.0 ? ego.v * ego.v / (-2.0 * a) : 0.0;
    v = 0.0;
  }
  ego.s += ds;
  ego.v = v;
  return ego;
}

long micro_steps_per_macro(double macro_dt, double micro_dt)
{
  if (!(macro_dt > 0.0) || !(micro_dt > 0.0)) {
    throw ConfigError("step sizes must be > 0");
  }
  const double ratio = macro_dt / micro_dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * n) {
    throw ConfigError(
      "macro step " + format_double(macro_dt) + " is not an integer multiple of micro step " +
      format_double(micro_dt));
  }
  return static_cast<long>(n);
}

MacroAdvance ego_macro_advance(
  const EgoState & ego, const std::vector<Neighbor> & neighbors, const EgoConfig & cfg,
  double t0, double macro_dt, double micro_dt)
{
  const long n = micro_steps_per_macro(macro_dt, micro_dt);
  MacroAdvance out{ego, {}};
  out.trace.reserve(static_cast<std::size_t>(n));
  auto & e = out.state;
  for (long k = 0; k < n; ++k) {
    if (!e.frozen) {
      const auto obs = sense_leader(e, neighbors, cfg.sensor);
      e.v_ref = reference_speed(e.v_ref, cfg.idm, obs, micro_dt);
      const double pedal = pedal_controller(e.v, e.v_ref, e.pi, cfg.driver, micro_dt);
      e = plant_step(std::move(e), pedal, cfg.limits, cfg.driver, micro_dt);
    }
    out.trace.push_back(
      {t0 + static_cast<double>(k + 1) * micro_dt, e.s, e.v, e.v_ref, e.pedal, e.a_cmd,
        e.a_realized});
  }
  return out;
}

std::string ego_trace_csv(const std::vector<EgoTraceRow> & rows)
{
  std::ostringstream out;
  out << "t,s,v,v_ref,pedal,a_cmd,a_realized\n";
  for (const auto & r : rows) {
    out << format_double(r.t) << ',' << format_double(r.s) << ',' << format_double(r.v) << ','
        << format_double(r.v_ref) << ',' << format_double(r.pedal) << ','
        << format_double(r.a_cmd) << ',' << format_double(r.a_realized) << '\n';
  }
  return out.str();
}

}  // namespace safetwin
