// Copyright 2026 The crashgen Authors
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
#include <string>
#include <vector>

#include "crashgen/rng.hpp"
#include "crashgen/scenario.hpp"
#include "crashgen/structured.hpp"

namespace crashgen
{

inline constexpr double kMaxAgentSpeed = 30.0;  // m/s, rollout speed clamp

struct SynthesisConfig
{
  double timestep = 0.1;  // 10 fps
  int horizon = 50;       // 50 timesteps = 5 s
  double default_length = 4.5;
  double default_width = 2.0;
  double accel_rate = 2.5;   // m/s^2 for Accelerate/Decelerate/Stop
  double turn_rate = 0.35;   // rad/s for TurnLeft/TurnRight
  // Seeded perturbation of each agent's placement-target distance, in meters.
  // 0 = exact bin-midpoint targets.
  double position_jitter = 0.0;
  uint64_t rng_seed = 0;
};

struct PlacedAgent
{
  int agent_id = 0;
  AgentPose pose;
  double length = 4.5;
  double width = 2.0;
  AgentAction action = AgentAction::KeepSpeed;
};

namespace detail
{

/// Quadrant center direction in the ego frame: quadrants 1..4 counterclockwise
/// starting front-left, so centers sit at 45, 135, 225, 315 degrees.
inline double quadrant_center_angle(int quadrant)
{
  return (2.0 * quadrant - 1.0) * (kPi / 4.0);
}

/// Desired lane direction (world angle) for an orientation enum, relative to
/// the ego heading.
inline double orientation_target_angle(Orientation o, double ego_heading)
{
  switch (o) {
    case Orientation::ParallelSame:
      return ego_heading;
    case Orientation::ParallelOpposite:
      return ego_heading + kPi;
    case Orientation::PerpendicularLeft:
      return ego_heading + kPi / 2.0;
    case Orientation::PerpendicularRight:
      return ego_heading - kPi / 2.0;
  }
  throw data_error("unknown orientation");
}

inline double segment_heading(const LaneSegment & seg)
{
  const Point2 d = seg.direction();
  return std::atan2(d.y, d.x);
}

}  // namespace detail

/// Deterministic placement: the ego snaps to the lane segment nearest the map
/// origin (heading along the lane, speed = bin midpoint). Each other agent
/// goes to the closest point, over all orientation-compatible segments (lane
/// direction within 30 degrees of the requested orientation), to its target
/// point ego + distance_mid * quadrant_direction.
inline std::vector<PlacedAgent> place_agents(const StructuredScene & scene, const MapRegion & map,
                                             const SynthesisConfig & cfg)
{
  if (map.segments.empty()) throw data_error("place_agents: map has no lane segments");
  constexpr double kOrientationTolerance = kPi / 6.0;  // 30 degrees

  std::vector<PlacedAgent> placed;
  Rng rng = Rng(cfg.rng_seed).fork(0x706C6163);  // placement stream

  // Ego.
  const Point2 origin{0.0, 0.0};
  const LaneSegment * ego_seg = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const LaneSegment & seg : map.segments) {
    const double d = point_segment_distance(origin, seg.segment());
    if (d < best) {
      best = d;
      ego_seg = &seg;
    }
  }
  PlacedAgent ego;
  ego.agent_id = kEgoAgentId;
  ego.pose.position = closest_point_on_segment(origin, ego_seg->segment());
  ego.pose.heading = detail::segment_heading(*ego_seg);
  ego.pose.speed = speed_bin_midpoint(scene.ego.speed_bin);
  ego.length = cfg.default_length;
  ego.width = cfg.default_width;
  ego.action = scene.ego.action;
  placed.push_back(ego);

  for (size_t i = 0; i < scene.others.size(); ++i) {
    const StructuredAgentSpec & spec = scene.others[i];
    double target_distance = distance_bin_midpoint(spec.distance_bin);
    if (cfg.position_jitter > 0.0) {
      target_distance += rng.uniform(-cfg.position_jitter, cfg.position_jitter);
      if (target_distance < 1.0) target_distance = 1.0;
    }
    const double angle = ego.pose.heading + detail::quadrant_center_angle(spec.quadrant);
    const Point2 target = ego.pose.position + target_distance * heading_unit(angle);
    const double want = detail::orientation_target_angle(spec.orientation, ego.pose.heading);
    const Point2 want_dir = heading_unit(want);

    const LaneSegment * chosen = nullptr;
    Point2 chosen_point;
    double chosen_cost = std::numeric_limits<double>::infinity();
    for (const LaneSegment & seg : map.segments) {
      if (heading_alignment_angle(seg.direction(), want_dir) > kOrientationTolerance) continue;
      const Point2 q = closest_point_on_segment(target, seg.segment());
      const double cost = distance(q, target);
      if (cost < chosen_cost) {
        chosen_cost = cost;
        chosen = &seg;
        chosen_point = q;
      }
    }
    if (chosen == nullptr) {
      throw data_error("no compatible lane for agent " + std::to_string(i) + " (orientation " +
                       to_string(spec.orientation) + ")");
    }
    PlacedAgent agent;
    agent.agent_id = static_cast<int>(i) + 1;
    agent.pose.position = chosen_point;
    agent.pose.heading = detail::segment_heading(*chosen);
    agent.pose.speed = speed_bin_midpoint(spec.speed_bin);
    agent.length = cfg.default_length;
    agent.width = cfg.default_width;
    agent.action = spec.action;
    placed.push_back(agent);
  }
  return placed;
}

namespace detail
{

/// Yaw-rate command at elapsed time t for a turn action: turn_rate for the
/// first 2 s, then unwind back toward the initial heading at the same rate,
/// then hold (a lane-change style S-curve).
inline double turn_command(double t, double dt, double turn_rate, bool left)
{
  constexpr double kTurnPhase = 2.0;
  const double sign = left ? 1.0 : -1.0;
  if (t < kTurnPhase - 0.5 * dt) return sign * turn_rate;
  if (t < 2.0 * kTurnPhase - 0.5 * dt) return -sign * turn_rate;
  return 0.0;
}

}  // namespace detail

/// Single deterministic unicycle rollout per agent:
///   v' = clamp(v + a*dt, 0, 30);  theta' = theta + omega*dt;
///   x' = x + v'*cos(theta')*dt;   y' = y + v'*sin(theta')*dt.
/// Accelerate/Decelerate hold +/-accel_rate; Stop decelerates to zero and
/// stays; KeepSpeed holds; TurnLeft/TurnRight follow the S-curve above.
inline Scenario rollout_motion(const std::vector<PlacedAgent> & placed, const MapRegion & map,
                               const SynthesisConfig & cfg)
{
  Scenario scenario;
  scenario.map = map;
  scenario.timestep = cfg.timestep;
  scenario.horizon = cfg.horizon;

  for (const PlacedAgent & agent : placed) {
    AgentTrack track;
    track.agent_id = agent.agent_id;
    track.length = agent.length;
    track.width = agent.width;
    track.poses.reserve(static_cast<size_t>(cfg.horizon));
    track.poses.push_back(agent.pose);

    double v = agent.pose.speed;
    double theta = agent.pose.heading;
    Point2 pos = agent.pose.position;
    for (int step = 1; step < cfg.horizon; ++step) {
      const double t = (step - 1) * cfg.timestep;  // control time of this transition
      double a = 0.0;
      double omega = 0.0;
      switch (agent.action) {
        case AgentAction::Accelerate:
          a = cfg.accel_rate;
          break;
        case AgentAction::Decelerate:
          a = -cfg.accel_rate;
          break;
        case AgentAction::Stop:
          a = v > 0.0 ? -cfg.accel_rate : 0.0;
          break;
        case AgentAction::KeepSpeed:
          break;
        case AgentAction::TurnLeft:
          omega = detail::turn_command(t, cfg.timestep, cfg.turn_rate, true);
          break;
        case AgentAction::TurnRight:
          omega = detail::turn_command(t, cfg.timestep, cfg.turn_rate, false);
          break;
      }
      v = std::clamp(v + a * cfg.timestep, 0.0, kMaxAgentSpeed);
      theta = normalize_angle(theta + omega * cfg.timestep);
      pos = pos + (v * cfg.timestep) * heading_unit(theta);
      track.poses.push_back({pos, theta, v});
    }
    scenario.tracks.push_back(std::move(track));
  }
  return scenario;
}

/// Full rule-based synthesis: placement + motion rollout. Pure function of
/// (scene, map, cfg) including the seed.
inline Scenario synthesize(const StructuredScene & scene, const MapRegion & map,
                           const SynthesisConfig & cfg)
{
  return rollout_motion(place_agents(scene, map, cfg), map, cfg);
}

}  // namespace crashgen
