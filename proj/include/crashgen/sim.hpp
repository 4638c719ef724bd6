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
#include <limits>
#include <vector>

#include "crashgen/geom.hpp"
#include "crashgen/scenario.hpp"
#include "crashgen/vocab.hpp"

namespace crashgen
{

/// Per-trajectory sub-metric scores. nc/dac/ddc/ttc/comfort are binary when
/// produced by evaluate(); ep is a progress ratio in [0, 1]. pdm_score accepts
/// fractional values for all six (corpus averages are fractional).
struct ScoreVector
{
  double nc = 1.0;       // no collisions
  double dac = 1.0;      // drivable-area compliance
  double ddc = 1.0;      // driving-direction compliance
  double ttc = 1.0;      // time-to-collision margin
  double comfort = 1.0;  // accel / yaw-rate bounds
  double ep = 0.0;       // ego progress ratio

  friend bool operator==(const ScoreVector &, const ScoreVector &) = default;
};

inline constexpr int kMetricCount = 6;

inline std::array<double, kMetricCount> to_array(const ScoreVector & v)
{
  return {v.nc, v.dac, v.ddc, v.ttc, v.comfort, v.ep};
}

inline ScoreVector score_from_array(const std::array<double, kMetricCount> & a)
{
  return {a[0], a[1], a[2], a[3], a[4], a[5]};
}

struct SimConfig
{
  double ttc_threshold = 1.0;     // s; projected first contact sooner than this fails TTC
  double max_abs_accel = 4.0;     // m/s^2, feasibility clamp and comfort bound
  double max_abs_yaw_rate = 0.8;  // rad/s, feasibility clamp and comfort bound
  double ddc_angle_limit = 2.0;   // rad, heading-vs-lane limit
  double ttc_lookahead = 3.0;     // s, constant-velocity projection window
  double ttc_substep = 0.1;       // s
};

/// PDM aggregate: NC * DAC * DDC * (5*TTC + 2*C + 5*EP) / 12.
inline double pdm_score(const ScoreVector & v)
{
  return v.nc * v.dac * v.ddc * (5.0 * v.ttc + 2.0 * v.comfort + 5.0 * v.ep) / 12.0;
}

/// Path arc length of a trajectory.
inline double trajectory_progress(const EgoTrajectory & traj)
{
  double s = 0.0;
  for (size_t i = 0; i + 1 < traj.poses.size(); ++i) {
    s += distance(traj.poses[i + 1].position, traj.poses[i].position);
  }
  return s;
}

/// Anchor an ego-frame candidate at the ego's current pose and re-integrate it
/// under unicycle dynamics with per-step acceleration and yaw-rate clamps, so
/// the output is reachable from the ego history by construction. A candidate
/// that already respects the clamps is reproduced exactly.
inline EgoTrajectory make_feasible(const EgoTrajectory & candidate, const AgentPose & ego_at_t0,
                                   const SimConfig & cfg)
{
  if (candidate.poses.empty()) throw data_error("make_feasible: empty candidate");
  const double dt = kTrajectoryTimestep;

  // World-frame targets.
  std::vector<AgentPose> target;
  target.reserve(candidate.poses.size());
  for (const AgentPose & p : candidate.poses) {
    AgentPose w;
    w.position = ego_at_t0.position + rotated(p.position, ego_at_t0.heading);
    w.heading = normalize_angle(p.heading + ego_at_t0.heading);
    w.speed = p.speed;
    target.push_back(w);
  }

  EgoTrajectory out;
  out.poses.reserve(target.size());
  AgentPose state = ego_at_t0;
  out.poses.push_back(state);
  for (size_t i = 1; i < target.size(); ++i) {
    const double want_yaw = normalize_angle(target[i].heading - state.heading) / dt;
    const double yaw = std::clamp(want_yaw, -cfg.max_abs_yaw_rate, cfg.max_abs_yaw_rate);
    const double want_speed = distance(target[i].position, state.position) / dt;
    const double accel = std::clamp((want_speed - state.speed) / dt, -cfg.max_abs_accel,
                                    cfg.max_abs_accel);
    AgentPose next;
    next.speed = std::max(0.0, state.speed + accel * dt);
    next.heading = normalize_angle(state.heading + yaw * dt);
    next.position = state.position + (next.speed * dt) * heading_unit(next.heading);
    out.poses.push_back(next);
    state = next;
  }
  return out;
}

namespace detail
{

inline const LaneSegment & nearest_segment(const MapRegion & map, Point2 p)
{
  const LaneSegment * best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const LaneSegment & seg : map.segments) {
    const double d = point_segment_distance(p, seg.segment());
    if (d < best_d) {
      best_d = d;
      best = &seg;
    }
  }
  return *best;
}

inline double min_lane_distance(const MapRegion & map, Point2 p)
{
  double best = std::numeric_limits<double>::infinity();
  for (const LaneSegment & seg : map.segments) {
    best = std::min(best, point_segment_distance(p, seg.segment()));
  }
  return best;
}

// Comfort bounds are compared with a half-ulp guard: trajectories built by
// make_feasible sit exactly on the clamp and must pass.
inline bool within_bound(double value, double bound)
{
  return std::abs(value) <= bound * (1.0 + 1e-12) + 1e-12;
}

/// First projected box contact within the lookahead, holding every agent at
/// constant velocity and heading. Returns +inf when no contact.
inline double projected_time_to_collision(const OrientedBox & ego_box, Point2 ego_vel,
                                          const AgentTrack & agent, const AgentPose & agent_pose,
                                          const SimConfig & cfg)
{
  const Point2 agent_vel = agent_pose.speed * heading_unit(agent_pose.heading);
  const int substeps = static_cast<int>(std::round(cfg.ttc_lookahead / cfg.ttc_substep));
  for (int k = 0; k <= substeps; ++k) {
    const double tau = k * cfg.ttc_substep;
    const OrientedBox ego_proj(ego_box.center + tau * ego_vel, ego_box.heading, ego_box.length,
                               ego_box.width);
    const OrientedBox agent_proj(agent_pose.position + tau * agent_vel, agent_pose.heading,
                                 agent.length, agent.width);
    // Cheap reject: beyond combined circumradii they cannot touch.
    const double circ = 0.5 * std::hypot(ego_proj.length, ego_proj.width) +
                        0.5 * std::hypot(agent_proj.length, agent_proj.width);
    if (distance(ego_proj.center, agent_proj.center) > circ) continue;
    if (boxes_intersect(ego_proj, agent_proj)) return tau;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Closed-loop scoring of one ego trajectory against logged (non-reactive)
/// agent tracks.
///
///   nc       0 iff the ego box intersects any agent box at any step.
///   dac      1 iff the ego center stays within corridor_half_width + width/2
///            of some lane segment at every step.
///   ddc      1 iff the heading-vs-nearest-lane angle stays <= ddc_angle_limit.
///   ttc      1 iff the constant-velocity projected first contact with every
///            agent exceeds ttc_threshold at every step.
///   comfort  1 iff finite-difference accel and yaw rate stay in bounds.
///   ep       clamp(progress / reference_progress, 0, 1); 1 when the
///            reference is 0 (no collision-free reference makes progress).
///
/// reference_progress is the arc length of the best collision-free vocabulary
/// entry for this scenario; score_vocabulary computes it in a first pass.
inline ScoreVector evaluate(const Scenario & scenario, const EgoTrajectory & ego_traj,
                            const SimConfig & cfg, double reference_progress)
{
  const int steps = static_cast<int>(ego_traj.poses.size());
  if (steps > scenario.horizon) {
    throw data_error("evaluate: ego trajectory horizon (" + std::to_string(steps) +
                     ") exceeds scenario horizon (" + std::to_string(scenario.horizon) + ")");
  }
  if (scenario.map.segments.empty()) throw data_error("evaluate: map has no lane segments");
  const AgentTrack & ego = scenario.ego_track();
  const double dt = scenario.timestep;

  ScoreVector v;
  double min_ttc = std::numeric_limits<double>::infinity();
  for (int i = 0; i < steps; ++i) {
    const AgentPose & pose = ego_traj.poses[static_cast<size_t>(i)];
    const OrientedBox ego_box(pose.position, pose.heading, ego.length, ego.width);

    for (const AgentTrack & agent : scenario.tracks) {
      if (agent.agent_id == kEgoAgentId) continue;
      const AgentPose & ap = agent.poses[static_cast<size_t>(i)];
      const double circ =
        0.5 * std::hypot(ego.length, ego.width) + 0.5 * std::hypot(agent.length, agent.width);
      if (distance(pose.position, ap.position) <= circ &&
          boxes_intersect(ego_box, agent.box_at(i))) {
        v.nc = 0.0;
      }
      const double ttc = detail::projected_time_to_collision(
        ego_box, pose.speed * heading_unit(pose.heading), agent, ap, cfg);
      min_ttc = std::min(min_ttc, ttc);
    }

    const double lane_d = detail::min_lane_distance(scenario.map, pose.position);
    if (lane_d > scenario.map.corridor_half_width + 0.5 * ego.width) v.dac = 0.0;

    const LaneSegment & nearest = detail::nearest_segment(scenario.map, pose.position);
    if (heading_alignment_angle(heading_unit(pose.heading), nearest.direction()) >
        cfg.ddc_angle_limit) {
      v.ddc = 0.0;
    }

    if (i + 1 < steps) {
      const AgentPose & next = ego_traj.poses[static_cast<size_t>(i + 1)];
      const double accel = (next.speed - pose.speed) / dt;
      const double yaw_rate = normalize_angle(next.heading - pose.heading) / dt;
      if (!detail::within_bound(accel, cfg.max_abs_accel) ||
          !detail::within_bound(yaw_rate, cfg.max_abs_yaw_rate)) {
        v.comfort = 0.0;
      }
    }
  }
  v.ttc = min_ttc > cfg.ttc_threshold ? 1.0 : 0.0;

  if (reference_progress <= 1e-12) {
    v.ep = 1.0;
  } else {
    v.ep = std::clamp(trajectory_progress(ego_traj) / reference_progress, 0.0, 1.0);
  }
  return v;
}

/// True iff the trajectory is collision-free against the logged tracks.
inline bool collision_free(const Scenario & scenario, const EgoTrajectory & ego_traj)
{
  const AgentTrack & ego = scenario.ego_track();
  const int steps = static_cast<int>(ego_traj.poses.size());
  for (int i = 0; i < steps; ++i) {
    const AgentPose & pose = ego_traj.poses[static_cast<size_t>(i)];
    const OrientedBox ego_box(pose.position, pose.heading, ego.length, ego.width);
    for (const AgentTrack & agent : scenario.tracks) {
      if (agent.agent_id == kEgoAgentId) continue;
      const double circ =
        0.5 * std::hypot(ego.length, ego.width) + 0.5 * std::hypot(agent.length, agent.width);
      if (distance(pose.position, agent.poses[static_cast<size_t>(i)].position) <= circ &&
          boxes_intersect(ego_box, agent.box_at(i))) {
        return false;
      }
    }
  }
  return true;
}

/// Arc length of the best collision-free vocabulary entry after feasibility
/// tracking; 0 when every entry collides.
inline double reference_progress_for(const Scenario & scenario, const TrajectoryVocabulary & vocab,
                                     const SimConfig & cfg)
{
  const AgentPose ego0 = scenario.ego_track().poses.front();
  double best = 0.0;
  for (const EgoTrajectory & entry : vocab.entries) {
    const EgoTrajectory traj = make_feasible(entry, ego0, cfg);
    if (collision_free(scenario, traj)) {
      best = std::max(best, trajectory_progress(traj));
    }
  }
  return best;
}

/// Score every vocabulary entry against a scenario: feasibility-track each
/// entry from the ego's t=0 pose, compute the EP reference in a first pass,
/// then evaluate. Output order matches the vocabulary.
inline std::vector<ScoreVector> score_vocabulary(const Scenario & scenario,
                                                 const TrajectoryVocabulary & vocab,
                                                 const SimConfig & cfg)
{
  const AgentPose ego0 = scenario.ego_track().poses.front();
  const double reference = reference_progress_for(scenario, vocab, cfg);
  std::vector<ScoreVector> out;
  out.reserve(vocab.entries.size());
  for (const EgoTrajectory & entry : vocab.entries) {
    out.push_back(evaluate(scenario, make_feasible(entry, ego0, cfg), cfg, reference));
  }
  return out;
}

}  // namespace crashgen
