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

#include <string>
#include <vector>

#include "crashgen/sim.hpp"

namespace crashgen
{

struct FilterConfig
{
  double d_thres = 3.0;                        // m, lane adherence
  double theta_thres = 10.0 * kPi / 180.0;     // rad, direction alignment
  bool check_ego_compliance = false;           // lane checks normally skip the ego track
  const TrajectoryVocabulary * vocab = nullptr;  // required for the feasibility check
  SimConfig sim;
};

enum class FilterStage
{
  LaneAdherence,
  DirectionAlignment,
  NoCollision,
  NoFeasibleAvoidance,
  Passed,
};

inline std::string to_string(FilterStage s)
{
  switch (s) {
    case FilterStage::LaneAdherence:
      return "LaneAdherence";
    case FilterStage::DirectionAlignment:
      return "DirectionAlignment";
    case FilterStage::NoCollision:
      return "NoCollision";
    case FilterStage::NoFeasibleAvoidance:
      return "NoFeasibleAvoidance";
    case FilterStage::Passed:
      return "Passed";
  }
  throw data_error("unknown filter stage");
}

inline FilterStage filter_stage_from_string(const std::string & s)
{
  for (FilterStage stage : {FilterStage::LaneAdherence, FilterStage::DirectionAlignment,
                            FilterStage::NoCollision, FilterStage::NoFeasibleAvoidance,
                            FilterStage::Passed}) {
    if (to_string(stage) == s) return stage;
  }
  throw data_error("unknown filter stage '" + s + "'");
}

struct ComplianceResult
{
  bool passed = true;
  int first_violation_step = -1;
  double value = 0.0;  // offending distance (m) or angle (rad)
};

/// Lane adherence: at every step, the minimum distance from the agent position
/// to the nearest lane segment must stay <= d_thres.
inline ComplianceResult check_lane_adherence(const AgentTrack & track, const MapRegion & map,
                                             double d_thres)
{
  if (map.segments.empty()) throw data_error("check_lane_adherence: map has no lane segments");
  for (size_t i = 0; i < track.poses.size(); ++i) {
    const double d = detail::min_lane_distance(map, track.poses[i].position);
    if (d > d_thres) return {false, static_cast<int>(i), d};
  }
  return {};
}

/// Direction alignment: at every step, the angle between the agent heading and
/// the direction of the nearest lane segment must stay <= theta_thres.
inline ComplianceResult check_direction_alignment(const AgentTrack & track, const MapRegion & map,
                                                  double theta_thres)
{
  if (map.segments.empty()) throw data_error("check_direction_alignment: map has no lane segments");
  for (size_t i = 0; i < track.poses.size(); ++i) {
    const AgentPose & p = track.poses[i];
    const LaneSegment & nearest = detail::nearest_segment(map, p.position);
    const double theta = heading_alignment_angle(heading_unit(p.heading), nearest.direction());
    if (theta > theta_thres) return {false, static_cast<int>(i), theta};
  }
  return {};
}

struct CollisionInvolvement
{
  bool collided = false;
  int step = -1;
  int agent_id = -1;
};

/// First ego/agent box intersection over the logged tracks. For collision
/// scenario retention, collided == true is the pass condition.
inline CollisionInvolvement check_collision_involvement(const Scenario & scenario)
{
  const AgentTrack & ego = scenario.ego_track();
  for (int i = 0; i < scenario.horizon; ++i) {
    const OrientedBox ego_box = ego.box_at(i);
    for (const AgentTrack & agent : scenario.tracks) {
      if (agent.agent_id == kEgoAgentId) continue;
      const double circ =
        0.5 * std::hypot(ego.length, ego.width) + 0.5 * std::hypot(agent.length, agent.width);
      if (distance(ego.poses[static_cast<size_t>(i)].position,
                   agent.poses[static_cast<size_t>(i)].position) <= circ &&
          boxes_intersect(ego_box, agent.box_at(i))) {
        return {true, i, agent.agent_id};
      }
    }
  }
  return {};
}

struct FeasibilityResult
{
  bool feasible = false;
  std::vector<int> survivors;  // collision-free vocabulary entry indices
};

/// Step 2: score the vocabulary and keep the scenario iff at least one entry
/// avoids every collision.
inline FeasibilityResult check_avoidance_feasibility(const Scenario & scenario,
                                                     const FilterConfig & cfg)
{
  if (cfg.vocab == nullptr) {
    throw data_error("check_avoidance_feasibility: no vocabulary configured");
  }
  const AgentPose ego0 = scenario.ego_track().poses.front();
  FeasibilityResult result;
  for (size_t i = 0; i < cfg.vocab->entries.size(); ++i) {
    const EgoTrajectory traj = make_feasible(cfg.vocab->entries[i], ego0, cfg.sim);
    if (collision_free(scenario, traj)) result.survivors.push_back(static_cast<int>(i));
  }
  result.feasible = !result.survivors.empty();
  return result;
}

struct FilterVerdict
{
  bool passed = false;
  FilterStage stage = FilterStage::Passed;
  int agent_id = -1;  // offending agent for stage-1 failures / first contact
  int step = -1;
  double value = 0.0;
  std::vector<int> survivors;
  std::string details;
};

/// The two-step filter. Check order is fixed for deterministic stage
/// reporting: adherence, alignment (generated traffic only, ego exempt unless
/// configured), collision involvement, then the expensive avoidance
/// feasibility pass.
inline FilterVerdict filter_scenario(const Scenario & scenario, const FilterConfig & cfg)
{
  FilterVerdict verdict;
  for (const AgentTrack & track : scenario.tracks) {
    if (track.agent_id == kEgoAgentId && !cfg.check_ego_compliance) continue;
    const ComplianceResult adherence = check_lane_adherence(track, scenario.map, cfg.d_thres);
    if (!adherence.passed) {
      verdict.stage = FilterStage::LaneAdherence;
      verdict.agent_id = track.agent_id;
      verdict.step = adherence.first_violation_step;
      verdict.value = adherence.value;
      verdict.details = "agent " + std::to_string(track.agent_id) + " off lane at step " +
                        std::to_string(adherence.first_violation_step) + " (d=" +
                        std::to_string(adherence.value) + " m)";
      return verdict;
    }
  }
  for (const AgentTrack & track : scenario.tracks) {
    if (track.agent_id == kEgoAgentId && !cfg.check_ego_compliance) continue;
    const ComplianceResult alignment =
      check_direction_alignment(track, scenario.map, cfg.theta_thres);
    if (!alignment.passed) {
      verdict.stage = FilterStage::DirectionAlignment;
      verdict.agent_id = track.agent_id;
      verdict.step = alignment.first_violation_step;
      verdict.value = alignment.value;
      verdict.details = "agent " + std::to_string(track.agent_id) + " misaligned at step " +
                        std::to_string(alignment.first_violation_step) + " (theta=" +
                        std::to_string(alignment.value * 180.0 / kPi) + " deg)";
      return verdict;
    }
  }
  const CollisionInvolvement collision = check_collision_involvement(scenario);
  if (!collision.collided) {
    verdict.stage = FilterStage::NoCollision;
    verdict.details = "no ego collision in logged tracks";
    return verdict;
  }
  verdict.agent_id = collision.agent_id;
  verdict.step = collision.step;

  const FeasibilityResult feasibility = check_avoidance_feasibility(scenario, cfg);
  if (!feasibility.feasible) {
    verdict.stage = FilterStage::NoFeasibleAvoidance;
    verdict.details = "every vocabulary trajectory collides";
    return verdict;
  }
  verdict.passed = true;
  verdict.stage = FilterStage::Passed;
  verdict.survivors = feasibility.survivors;
  verdict.details = "collision at step " + std::to_string(collision.step) + " with agent " +
                    std::to_string(collision.agent_id) + ", " +
                    std::to_string(feasibility.survivors.size()) + " avoidance trajectories";
  return verdict;
}

}  // namespace crashgen
