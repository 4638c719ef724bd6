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

#include <cstdio>
#include <optional>
#include <string>

#include "crashgen/scenario.hpp"

namespace crashgen
{

namespace detail
{

inline std::string fmt(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

/// Top-down SVG review sheet: lane corridors and centerlines, agent boxes
/// every few timesteps with opacity ramping toward the end of the horizon
/// (ego red, others blue), and an optional planned trajectory in green.
/// Y is flipped so +y points up in the figure.
inline std::string render_scenario_svg(const Scenario & scenario,
                                       const std::optional<EgoTrajectory> & planned = std::nullopt)
{
  double min_x = 1e18, min_y = 1e18, max_x = -1e18, max_y = -1e18;
  auto grow = [&](Point2 p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  };
  for (const LaneSegment & seg : scenario.map.segments) {
    grow(seg.start);
    grow(seg.end);
  }
  for (const AgentTrack & t : scenario.tracks) {
    for (const AgentPose & p : t.poses) grow(p.position);
  }
  const double margin = 8.0;
  min_x -= margin;
  min_y -= margin;
  max_x += margin;
  max_y += margin;
  const double scale = 8.0;  // px per meter
  const double width = (max_x - min_x) * scale;
  const double height = (max_y - min_y) * scale;
  auto px = [&](Point2 p) -> std::pair<double, double> {
    return {(p.x - min_x) * scale, (max_y - p.y) * scale};
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt(width) +
         "\" height=\"" + detail::fmt(height) + "\" viewBox=\"0 0 " + detail::fmt(width) + " " +
         detail::fmt(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n";

  for (const LaneSegment & seg : scenario.map.segments) {
    const auto [x1, y1] = px(seg.start);
    const auto [x2, y2] = px(seg.end);
    svg += "<line x1=\"" + detail::fmt(x1) + "\" y1=\"" + detail::fmt(y1) + "\" x2=\"" +
           detail::fmt(x2) + "\" y2=\"" + detail::fmt(y2) +
           "\" stroke=\"#b0b0b0\" stroke-width=\"" +
           detail::fmt(2.0 * scenario.map.corridor_half_width * scale) +
           "\" stroke-linecap=\"round\" opacity=\"0.35\"/>\n";
    svg += "<line x1=\"" + detail::fmt(x1) + "\" y1=\"" + detail::fmt(y1) + "\" x2=\"" +
           detail::fmt(x2) + "\" y2=\"" + detail::fmt(y2) +
           "\" stroke=\"#606060\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
  }

  const int stride = std::max(1, scenario.horizon / 10);
  for (const AgentTrack & t : scenario.tracks) {
    const std::string fill = t.agent_id == kEgoAgentId ? "#d64545" : "#4569d6";
    for (int step = 0; step < scenario.horizon; step += stride) {
      const double opacity = 0.15 + 0.75 * step / std::max(1, scenario.horizon - 1);
      svg += "<polygon points=\"";
      for (const Point2 & c : t.box_at(step).corners()) {
        const auto [x, y] = px(c);
        svg += detail::fmt(x) + "," + detail::fmt(y) + " ";
      }
      svg += "\" fill=\"" + fill + "\" opacity=\"" + detail::fmt(opacity) + "\"/>\n";
    }
  }

  if (planned && !planned->poses.empty()) {
    svg += "<polyline points=\"";
    for (const AgentPose & p : planned->poses) {
      const auto [x, y] = px(p.position);
      svg += detail::fmt(x) + "," + detail::fmt(y) + " ";
    }
    svg += "\" fill=\"none\" stroke=\"#2f9e44\" stroke-width=\"2.5\"/>\n";
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace crashgen
