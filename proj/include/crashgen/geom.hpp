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
#include <array>
#include <cmath>
#include <string>

#include "crashgen/error.hpp"

namespace crashgen
{

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Point2
{
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2 &, const Point2 &) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double squared_norm(Point2 p) { return p.x * p.x + p.y * p.y; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Unit vector for a heading angle.
inline Point2 heading_unit(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Rotate p by angle (counterclockwise).
inline Point2 rotated(Point2 p, double angle)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Wrap an angle to [-pi, pi).
inline double normalize_angle(double a)
{
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r - kPi;
}

struct Segment2
{
  Point2 a;
  Point2 b;

  Segment2(Point2 start, Point2 end) : a(start), b(end)
  {
    if (a == b) {
      throw validation_error(
        "degenerate segment at (" + std::to_string(a.x) + ", " + std::to_string(a.y) + ")");
    }
  }

  Point2 direction() const { return b - a; }
  double length() const { return distance(a, b); }

  friend bool operator==(const Segment2 &, const Segment2 &) = default;
};

/// Minimum Euclidean distance from p to the segment: perpendicular distance
/// clamped to the endpoints when the foot of the perpendicular lies outside.
inline double point_segment_distance(Point2 p, const Segment2 & s)
{
  const Point2 d = s.direction();
  const double t = std::clamp(dot(p - s.a, d) / squared_norm(d), 0.0, 1.0);
  return distance(p, s.a + t * d);
}

/// Closest point on the segment to p.
inline Point2 closest_point_on_segment(Point2 p, const Segment2 & s)
{
  const Point2 d = s.direction();
  const double t = std::clamp(dot(p - s.a, d) / squared_norm(d), 0.0, 1.0);
  return s.a + t * d;
}

/// Alignment angle between two direction vectors, in [0, pi]:
/// arccos(v_ego.v_lane / (|v_ego||v_lane|)). The normalized dot product is
/// clamped to [-1, 1] first; rounding can push it past 1 by a few ulps.
inline double heading_alignment_angle(Point2 v_ego, Point2 v_lane)
{
  const double n1 = norm(v_ego);
  const double n2 = norm(v_lane);
  if (n1 == 0.0 || n2 == 0.0) {
    throw validation_error("heading_alignment_angle: zero-length direction vector");
  }
  const double c = std::clamp(dot(v_ego, v_lane) / (n1 * n2), -1.0, 1.0);
  return std::acos(c);
}

/// Heading-aligned rectangle (vehicle footprint).
struct OrientedBox
{
  Point2 center;
  double heading = 0.0;  // normalized to [-pi, pi)
  double length = 1.0;   // extent along heading
  double width = 1.0;    // extent across heading

  OrientedBox(Point2 c, double h, double len, double wid)
  : center(c), heading(normalize_angle(h)), length(len), width(wid)
  {
    if (!(len > 0.0) || !(wid > 0.0) || !std::isfinite(len) || !std::isfinite(wid)) {
      throw validation_error("OrientedBox: length and width must be positive finite");
    }
  }

  std::array<Point2, 4> corners() const
  {
    const Point2 u = heading_unit(heading);
    const Point2 v{-u.y, u.x};
    const Point2 du = (0.5 * length) * u;
    const Point2 dv = (0.5 * width) * v;
    return {center + du + dv, center + du + (-1.0 * dv), center + (-1.0 * dv) + (-1.0 * du),
            center + (-1.0 * du) + dv};
  }
};

namespace detail
{
// Separation test along one axis; tangency (exact touch) is NOT separation.
inline bool separated_on_axis(Point2 axis, const OrientedBox & a, const OrientedBox & b)
{
  const Point2 ua = heading_unit(a.heading);
  const Point2 ub = heading_unit(b.heading);
  const double ra = 0.5 * a.length * std::abs(dot(axis, ua)) +
                    0.5 * a.width * std::abs(cross(axis, ua));
  const double rb = 0.5 * b.length * std::abs(dot(axis, ub)) +
                    0.5 * b.width * std::abs(cross(axis, ub));
  return std::abs(dot(axis, b.center - a.center)) > ra + rb;
}
}  // namespace detail

/// Separating-axis test over the 4 edge normals of the two rectangles.
/// Touching boxes (zero separation) count as intersecting.
inline bool boxes_intersect(const OrientedBox & a, const OrientedBox & b)
{
  const Point2 ua = heading_unit(a.heading);
  const Point2 ub = heading_unit(b.heading);
  const std::array<Point2, 4> axes{ua, Point2{-ua.y, ua.x}, ub, Point2{-ub.y, ub.x}};
  for (const Point2 & axis : axes) {
    if (detail::separated_on_axis(axis, a, b)) return false;
  }
  return true;
}

}  // namespace crashgen
