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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "crashgen/geom.hpp"
#include "crashgen/io.hpp"

namespace crashgen
{

inline constexpr int kMaxLaneSegments = 384;
inline constexpr int kMaxAgents = 32;
inline constexpr int kEgoAgentId = 0;

/// Fixed planning-trajectory shape: 40 poses at 0.1 s = a 4 s horizon.
inline constexpr int kTrajectoryLength = 40;
inline constexpr double kTrajectoryTimestep = 0.1;

/// Tolerance of the soft |step displacement - speed*dt| track consistency check.
inline constexpr double kTrackConsistencyTolerance = 0.5;

struct LaneSegment
{
  int id = 0;
  Point2 start;
  Point2 end;

  Segment2 segment() const { return Segment2(start, end); }
  Point2 direction() const { return end - start; }

  friend bool operator==(const LaneSegment &, const LaneSegment &) = default;
};

struct MapRegion
{
  std::vector<LaneSegment> segments;
  double corridor_half_width = 2.0;

  friend bool operator==(const MapRegion &, const MapRegion &) = default;
};

struct AgentPose
{
  Point2 position;
  double heading = 0.0;
  double speed = 0.0;

  friend bool operator==(const AgentPose &, const AgentPose &) = default;
};

struct AgentTrack
{
  int agent_id = 0;
  double length = 4.5;
  double width = 2.0;
  std::vector<AgentPose> poses;

  OrientedBox box_at(int step) const
  {
    const AgentPose & p = poses.at(static_cast<size_t>(step));
    return OrientedBox(p.position, p.heading, length, width);
  }

  friend bool operator==(const AgentTrack &, const AgentTrack &) = default;
};

struct Scenario
{
  MapRegion map;
  std::vector<AgentTrack> tracks;
  double timestep = 0.1;
  int horizon = 50;

  const AgentTrack & ego_track() const
  {
    for (const AgentTrack & t : tracks) {
      if (t.agent_id == kEgoAgentId) return t;
    }
    throw data_error("scenario has no ego track");
  }

  friend bool operator==(const Scenario &, const Scenario &) = default;
};

/// 40-pose planning trajectory (4 s at 0.1 s), usually in the ego frame at
/// its first pose.
struct EgoTrajectory
{
  std::vector<AgentPose> poses;

  friend bool operator==(const EgoTrajectory &, const EgoTrajectory &) = default;
};

// ---------------------------------------------------------------------------
// Validation

/// Report-based validation: one human-readable descriptor per violated rule,
/// empty means every invariant holds.
inline std::vector<std::string> validate_scenario(const Scenario & s)
{
  std::vector<std::string> report;
  auto fail = [&report](const std::string & msg) { report.push_back(msg); };

  if (s.map.segments.empty()) fail("map.segments: empty (need 1..384 lane segments)");
  if (static_cast<int>(s.map.segments.size()) > kMaxLaneSegments)
    fail("map.segments: more than 384 lane segments");
  if (!(s.map.corridor_half_width > 0.0)) fail("map.corridor_half_width: must be > 0");

  std::set<int> seg_ids;
  for (const LaneSegment & seg : s.map.segments) {
    if (!seg_ids.insert(seg.id).second)
      fail("map.segments: duplicate id " + std::to_string(seg.id));
    if (seg.start == seg.end)
      fail("map.segments[" + std::to_string(seg.id) + "]: degenerate (start == end)");
    if (!is_finite(seg.start) || !is_finite(seg.end))
      fail("map.segments[" + std::to_string(seg.id) + "]: non-finite endpoint");
  }

  if (!(s.timestep > 0.0)) fail("timestep: must be > 0");
  if (s.horizon < 1) fail("horizon: must be >= 1");
  if (static_cast<int>(s.tracks.size()) > kMaxAgents) fail("tracks: more than 32 agents");

  int ego_count = 0;
  std::set<int> agent_ids;
  for (const AgentTrack & t : s.tracks) {
    const std::string where = "tracks[agent " + std::to_string(t.agent_id) + "]";
    if (t.agent_id == kEgoAgentId) ++ego_count;
    if (!agent_ids.insert(t.agent_id).second) fail(where + ": duplicate agent id");
    if (!(t.length > 0.0) || !(t.width > 0.0)) fail(where + ": length/width must be > 0");
    if (static_cast<int>(t.poses.size()) != s.horizon)
      fail(where + ": track length mismatch (" + std::to_string(t.poses.size()) + " poses, horizon " +
           std::to_string(s.horizon) + ")");
    for (size_t i = 0; i < t.poses.size(); ++i) {
      const AgentPose & p = t.poses[i];
      if (!is_finite(p.position) || !std::isfinite(p.heading) || !std::isfinite(p.speed)) {
        fail(where + ".poses[" + std::to_string(i) + "]: non-finite value");
        break;
      }
      if (p.speed < 0.0) {
        fail(where + ".poses[" + std::to_string(i) + "]: speed >= 0 violated");
        break;
      }
    }
    // Soft consistency: step displacement vs speed*dt.
    for (size_t i = 0; i + 1 < t.poses.size(); ++i) {
      const double step = distance(t.poses[i + 1].position, t.poses[i].position);
      if (std::abs(step - t.poses[i].speed * s.timestep) > kTrackConsistencyTolerance) {
        fail(where + ".poses[" + std::to_string(i) + "]: displacement inconsistent with speed*dt");
        break;
      }
    }
  }
  if (ego_count == 0) fail("tracks: missing ego (agent_id 0)");
  if (ego_count > 1) fail("tracks: duplicate ego (agent_id 0)");

  return report;
}

// ---------------------------------------------------------------------------
// Serialization (one JSON document per scenario)

inline json pose_to_json(const AgentPose & p)
{
  return json::array({p.position.x, p.position.y, p.heading, p.speed});
}

inline AgentPose pose_from_json(const json & j)
{
  if (!j.is_array() || j.size() != 4) throw parse_error("pose: expected [x, y, heading, speed]");
  AgentPose p;
  p.position = {j[0].get<double>(), j[1].get<double>()};
  p.heading = j[2].get<double>();
  p.speed = j[3].get<double>();
  return p;
}

inline json map_to_json(const MapRegion & m)
{
  json segs = json::array();
  for (const LaneSegment & s : m.segments) {
    segs.push_back({{"id", s.id},
                    {"start", json::array({s.start.x, s.start.y})},
                    {"end", json::array({s.end.x, s.end.y})}});
  }
  return {{"corridor_half_width", m.corridor_half_width}, {"segments", segs}};
}

inline MapRegion map_from_json(const json & j)
{
  MapRegion m;
  m.corridor_half_width = j.at("corridor_half_width").get<double>();
  for (const json & js : j.at("segments")) {
    LaneSegment s;
    s.id = js.at("id").get<int>();
    const json & a = js.at("start");
    const json & b = js.at("end");
    s.start = {a.at(0).get<double>(), a.at(1).get<double>()};
    s.end = {b.at(0).get<double>(), b.at(1).get<double>()};
    m.segments.push_back(s);
  }
  return m;
}

inline json scenario_to_json(const Scenario & s)
{
  json tracks = json::array();
  for (const AgentTrack & t : s.tracks) {
    json poses = json::array();
    for (const AgentPose & p : t.poses) poses.push_back(pose_to_json(p));
    tracks.push_back({{"agent_id", t.agent_id},
                      {"length", t.length},
                      {"width", t.width},
                      {"poses", poses}});
  }
  return {{"map", map_to_json(s.map)},
          {"tracks", tracks},
          {"timestep", s.timestep},
          {"horizon", s.horizon}};
}

inline Scenario scenario_from_json(const json & j)
{
  Scenario s;
  s.map = map_from_json(j.at("map"));
  s.timestep = j.at("timestep").get<double>();
  s.horizon = j.at("horizon").get<int>();
  for (const json & jt : j.at("tracks")) {
    AgentTrack t;
    t.agent_id = jt.at("agent_id").get<int>();
    t.length = jt.at("length").get<double>();
    t.width = jt.at("width").get<double>();
    for (const json & jp : jt.at("poses")) t.poses.push_back(pose_from_json(jp));
    s.tracks.push_back(std::move(t));
  }
  return s;
}

inline std::string join_report(const std::vector<std::string> & report)
{
  std::string out;
  for (const std::string & r : report) {
    if (!out.empty()) out += "; ";
    out += r;
  }
  return out;
}

inline void save_scenario(const Scenario & s, const std::filesystem::path & path)
{
  const std::vector<std::string> report = validate_scenario(s);
  if (!report.empty()) {
    throw validation_error("save_scenario(" + path.string() + "): " + join_report(report));
  }
  save_json_file(path, scenario_to_json(s));
}

inline Scenario load_scenario(const std::filesystem::path & path)
{
  Scenario s;
  try {
    s = scenario_from_json(load_json_file(path));
  } catch (const json::exception & e) {
    throw parse_error(path.string() + ": " + e.what());
  }
  const std::vector<std::string> report = validate_scenario(s);
  if (!report.empty()) {
    throw validation_error(path.string() + ": " + join_report(report));
  }
  return s;
}

inline void save_map(const MapRegion & m, const std::filesystem::path & path)
{
  save_json_file(path, map_to_json(m));
}

inline MapRegion load_map(const std::filesystem::path & path)
{
  try {
    return map_from_json(load_json_file(path));
  } catch (const json::exception & e) {
    throw parse_error(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Datasets: a directory of <id>.scenario.json files plus manifest.json

struct ManifestEntry
{
  std::string id;
  std::string split;  // "train" or "test"

  friend bool operator==(const ManifestEntry &, const ManifestEntry &) = default;
};

struct DatasetManifest
{
  std::vector<ManifestEntry> scenarios;

  friend bool operator==(const DatasetManifest &, const DatasetManifest &) = default;
};

inline void save_manifest(const DatasetManifest & m, const std::filesystem::path & dir)
{
  json entries = json::array();
  for (const ManifestEntry & e : m.scenarios) {
    entries.push_back({{"id", e.id}, {"split", e.split}});
  }
  save_json_file(dir / "manifest.json", json{{"scenarios", entries}});
}

inline DatasetManifest load_manifest(const std::filesystem::path & dir)
{
  DatasetManifest m;
  const json j = load_json_file(dir / "manifest.json");
  try {
    for (const json & je : j.at("scenarios")) {
      m.scenarios.push_back({je.at("id").get<std::string>(), je.at("split").get<std::string>()});
    }
  } catch (const json::exception & e) {
    throw parse_error((dir / "manifest.json").string() + ": " + e.what());
  }
  return m;
}

inline std::filesystem::path scenario_path(const std::filesystem::path & dir, const std::string & id)
{
  return dir / (id + ".scenario.json");
}

/// Load the scenarios listed in a dataset's manifest, optionally restricted
/// to one split ("train"/"test"; empty = all). Order follows the manifest.
inline std::vector<std::pair<std::string, Scenario>> load_dataset(
  const std::filesystem::path & dir, const std::string & split = "")
{
  std::vector<std::pair<std::string, Scenario>> out;
  for (const ManifestEntry & e : load_manifest(dir).scenarios) {
    if (!split.empty() && e.split != split) continue;
    out.emplace_back(e.id, load_scenario(scenario_path(dir, e.id)));
  }
  return out;
}

}  // namespace crashgen
