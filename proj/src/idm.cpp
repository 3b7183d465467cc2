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

#include "safetwin/idm.hpp"

#include "safetwin/common.hpp"

#include <algorithm>
#include <cmath>

namespace safetwin
{

IdmParams IdmParams::with_desired_speed(double v0)
{
  IdmParams p;
  p.desired_speed = v0;
  return p;
}

void IdmParams::validate() const
{
  auto ok = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!ok(desired_speed) || !ok(time_headway) || !ok(min_gap) || !ok(max_accel) ||
    !ok(comfort_decel))
  {
    throw ConfigError("IDM parameters must be finite and strictly positive");
  }
  if (!std::isfinite(exponent) || exponent < 1.0) {
    throw ConfigError("IDM exponent must be >= 1");
  }
}

double idm_desired_gap(double v, double leader_v, const IdmParams & p)
{
  const double dv = v - leader_v;
  const double dynamic = v * p.time_headway + v * dv / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
  return p.min_gap + std::max(0.0, dynamic);
}

double idm_accel(
  double v, const IdmParams & p, const std::optional<LeaderObservation> & obs,
  double emergency_decel)
{
  if (!std::isfinite(v) || (obs && (!std::isfinite(obs->gap) || !std::isfinite(obs->leader_v)))) {
    throw DomainError("idm_accel: non-finite input");
  }
  const double free_term = std::pow(std::max(v, 0.0) / p.desired_speed, p.exponent);
  double interaction = 0.0;
  if (obs) {
    if (obs->gap <= 0.0) {
      return -emergency_decel;
    }
    const double ratio = idm_desired_gap(v, obs->leader_v, p) / obs->gap;
    interaction = ratio * ratio;
  }
  const double a = p.max_accel * (1.0 - free_term - interaction);
  return std::clamp(a, -emergency_decel, p.max_accel);
}

double idm_equilibrium_gap(double v, const IdmParams & p)
{
  const double free_term = std::pow(v / p.desired_speed, p.exponent);
  if (!(free_term < 1.0)) {
    throw DomainError("no finite IDM equilibrium gap at or above the desired speed");
  }
  return (p.min_gap + v * p.time_headway) / std::sqrt(1.0 - free_term);
}

}  // namespace safetwin
