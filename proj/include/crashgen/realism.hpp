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
#include <limits>
#include <string>
#include <vector>

#include "crashgen/scenario.hpp"

namespace crashgen
{

using AttributeSample = std::vector<double>;

// ---------------------------------------------------------------------------
// Maximum mean discrepancy, Gaussian kernel, biased V-statistic estimator
// (expectations over all pairs, self-pairs included):
//   MMD^2 = E[k(x,x')] + E[k(y,y')] - 2 E[k(x,y)],  k(a,b) = exp(-|a-b|^2/(2 s^2)).

namespace detail
{

inline double gaussian_kernel(const AttributeSample & a, const AttributeSample & b, double sigma)
{
  double d2 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

inline double mean_kernel(const std::vector<AttributeSample> & xs,
                          const std::vector<AttributeSample> & ys, double sigma)
{
  double s = 0.0;
  for (const AttributeSample & x : xs) {
    for (const AttributeSample & y : ys) s += gaussian_kernel(x, y, sigma);
  }
  return s / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

}  // namespace detail

inline double mmd_squared(const std::vector<AttributeSample> & x,
                          const std::vector<AttributeSample> & y, double sigma)
{
  if (x.empty() || y.empty()) throw data_error("mmd_squared: empty sample set");
  if (!(sigma > 0.0)) throw data_error("mmd_squared: sigma must be > 0");
  const size_t dim = x.front().size();
  for (const auto * set : {&x, &y}) {
    for (const AttributeSample & s : *set) {
      if (s.size() != dim) throw data_error("mmd_squared: inconsistent sample dimension");
    }
  }
  return detail::mean_kernel(x, x, sigma) + detail::mean_kernel(y, y, sigma) -
         2.0 * detail::mean_kernel(x, y, sigma);
}

// ---------------------------------------------------------------------------
// Hungarian assignment (potentials + augmenting paths, O(n^2 m)).

struct MatchResult
{
  std::vector<int> assignment;  // row -> column; -1 for rows left unmatched
  double total_cost = 0.0;
};

namespace detail
{

/// Minimum-cost assignment for an n x m matrix with n <= m: every row matched
/// to a distinct column.
inline std::vector<int> hungarian_rows(const std::vector<std::vector<double>> & cost)
{
  const int n = static_cast<int>(cost.size());
  const int m = static_cast<int>(cost.front().size());
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<size_t>(m) + 1, 0.0);
  std::vector<int> p(static_cast<size_t>(m) + 1, 0);    // column -> row (1-based)
  std::vector<int> way(static_cast<size_t>(m) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(m) + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<size_t>(m) + 1, false);
    do {
      used[static_cast<size_t>(j0)] = true;
      const int i0 = p[static_cast<size_t>(j0)];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost[static_cast<size_t>(i0 - 1)][static_cast<size_t>(j - 1)] -
                           u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<size_t>(n), -1);
  for (int j = 1; j <= m; ++j) {
    if (p[static_cast<size_t>(j)] > 0) assignment[static_cast<size_t>(p[static_cast<size_t>(j)]) - 1] = j - 1;
  }
  return assignment;
}

}  // namespace detail

/// Minimum-total-cost injective assignment of rows to columns. When there are
/// more rows than columns, the matrix is padded with zero-cost dummy columns
/// internally and the |rows| - |columns| rows assigned to dummies are reported
/// as unmatched (-1); the common pad constant cannot change which real pairs
/// are optimal.
inline MatchResult hungarian(const std::vector<std::vector<double>> & cost)
{
  if (cost.empty() || cost.front().empty()) throw data_error("hungarian: empty cost matrix");
  const size_t n = cost.size();
  const size_t m = cost.front().size();
  for (const std::vector<double> & row : cost) {
    if (row.size() != m) throw data_error("hungarian: ragged cost matrix");
    for (double c : row) {
      if (std::isnan(c)) throw data_error("hungarian: NaN cost");
    }
  }

  std::vector<std::vector<double>> padded = cost;
  if (n > m) {
    for (std::vector<double> & row : padded) row.resize(n, 0.0);
  }
  MatchResult result;
  result.assignment = detail::hungarian_rows(padded);
  for (size_t i = 0; i < n; ++i) {
    if (result.assignment[i] >= static_cast<int>(m)) {
      result.assignment[i] = -1;  // dummy column
    } else {
      result.total_cost += cost[i][static_cast<size_t>(result.assignment[i])];
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Displacement errors between Hungarian-matched agents, in per-agent relative
// frames (each track expressed in the frame of its own initial pose, which
// cancels any global rigid transform).

namespace detail
{

inline std::vector<Point2> relative_track(const AgentTrack & track)
{
  std::vector<Point2> out;
  out.reserve(track.poses.size());
  const AgentPose & p0 = track.poses.front();
  for (const AgentPose & p : track.poses) {
    out.push_back(rotated(p.position - p0.position, -p0.heading));
  }
  return out;
}

}  // namespace detail

/// (mADE, mFDE): agents matched by Hungarian on initial-position distance,
/// displacement measured between relative-frame tracks over the common length.
inline std::pair<double, double> made_mfde(const Scenario & real, const Scenario & generated)
{
  if (real.tracks.empty() || generated.tracks.empty()) {
    throw data_error("made_mfde: empty scenario");
  }
  const bool swap = real.tracks.size() > generated.tracks.size();
  const Scenario & rows_sc = swap ? generated : real;
  const Scenario & cols_sc = swap ? real : generated;

  std::vector<std::vector<double>> cost(rows_sc.tracks.size(),
                                        std::vector<double>(cols_sc.tracks.size(), 0.0));
  for (size_t i = 0; i < rows_sc.tracks.size(); ++i) {
    for (size_t j = 0; j < cols_sc.tracks.size(); ++j) {
      cost[i][j] = distance(rows_sc.tracks[i].poses.front().position,
                            cols_sc.tracks[j].poses.front().position);
    }
  }
  const MatchResult match = hungarian(cost);

  double ade_sum = 0.0;
  double fde_sum = 0.0;
  int pairs = 0;
  for (size_t i = 0; i < match.assignment.size(); ++i) {
    if (match.assignment[i] < 0) continue;
    const std::vector<Point2> a = detail::relative_track(rows_sc.tracks[i]);
    const std::vector<Point2> b =
      detail::relative_track(cols_sc.tracks[static_cast<size_t>(match.assignment[i])]);
    const size_t steps = std::min(a.size(), b.size());
    double acc = 0.0;
    for (size_t t = 0; t < steps; ++t) acc += distance(a[t], b[t]);
    ade_sum += acc / static_cast<double>(steps);
    fde_sum += distance(a[steps - 1], b[steps - 1]);
    ++pairs;
  }
  if (pairs == 0) throw data_error("made_mfde: zero matched pairs");
  return {ade_sum / pairs, fde_sum / pairs};
}

// ---------------------------------------------------------------------------
// Corpus-level realism report: 4 MMD columns over initial agent attributes,
// plus mADE/mFDE over index-paired scenarios.

struct MmdSigmas
{
  double position = 5.0;  // m
  double heading = 0.5;   // heading compared as unit vectors
  double speed = 2.0;     // m/s
  double size = 1.0;      // m
};

struct RealismReport
{
  double mmd_position = 0.0;
  double mmd_heading = 0.0;
  double mmd_speed = 0.0;
  double mmd_size = 0.0;
  double made = 0.0;
  double mfde = 0.0;

  friend bool operator==(const RealismReport &, const RealismReport &) = default;
};

enum class AttributeKind
{
  Position,
  Heading,
  Speed,
  Size,
};

/// One sample per agent (initial pose) across the whole corpus.
inline std::vector<AttributeSample> collect_attribute_samples(const std::vector<Scenario> & corpus,
                                                              AttributeKind kind)
{
  std::vector<AttributeSample> out;
  for (const Scenario & s : corpus) {
    for (const AgentTrack & t : s.tracks) {
      const AgentPose & p = t.poses.front();
      switch (kind) {
        case AttributeKind::Position:
          out.push_back({p.position.x, p.position.y});
          break;
        case AttributeKind::Heading:
          out.push_back({std::cos(p.heading), std::sin(p.heading)});
          break;
        case AttributeKind::Speed:
          out.push_back({p.speed});
          break;
        case AttributeKind::Size:
          out.push_back({t.length, t.width});
          break;
      }
    }
  }
  return out;
}

/// Scenario pairs for the motion columns go by position in the corpora
/// (i-th real with i-th generated, up to the shorter length).
inline RealismReport realism_report(const std::vector<Scenario> & real,
                                    const std::vector<Scenario> & generated,
                                    const MmdSigmas & sigmas = {})
{
  if (real.empty() || generated.empty()) throw data_error("realism_report: empty corpus");
  RealismReport report;
  report.mmd_position = mmd_squared(collect_attribute_samples(real, AttributeKind::Position),
                                    collect_attribute_samples(generated, AttributeKind::Position),
                                    sigmas.position);
  report.mmd_heading = mmd_squared(collect_attribute_samples(real, AttributeKind::Heading),
                                   collect_attribute_samples(generated, AttributeKind::Heading),
                                   sigmas.heading);
  report.mmd_speed = mmd_squared(collect_attribute_samples(real, AttributeKind::Speed),
                                 collect_attribute_samples(generated, AttributeKind::Speed),
                                 sigmas.speed);
  report.mmd_size = mmd_squared(collect_attribute_samples(real, AttributeKind::Size),
                                collect_attribute_samples(generated, AttributeKind::Size),
                                sigmas.size);
  const size_t pairs = std::min(real.size(), generated.size());
  double ade = 0.0;
  double fde = 0.0;
  for (size_t i = 0; i < pairs; ++i) {
    const auto [a, f] = made_mfde(real[i], generated[i]);
    ade += a;
    fde += f;
  }
  report.made = ade / static_cast<double>(pairs);
  report.mfde = fde / static_cast<double>(pairs);
  return report;
}

inline json realism_report_to_json(const RealismReport & r)
{
  return {{"Position", r.mmd_position}, {"Heading", r.mmd_heading}, {"Speed", r.mmd_speed},
          {"Size", r.mmd_size},         {"mADE", r.made},           {"mFDE", r.mfde}};
}

inline RealismReport realism_report_from_json(const json & j)
{
  RealismReport r;
  try {
    r.mmd_position = j.at("Position").get<double>();
    r.mmd_heading = j.at("Heading").get<double>();
    r.mmd_speed = j.at("Speed").get<double>();
    r.mmd_size = j.at("Size").get<double>();
    r.made = j.at("mADE").get<double>();
    r.mfde = j.at("mFDE").get<double>();
  } catch (const json::exception & e) {
    throw parse_error(std::string("realism report: ") + e.what());
  }
  return r;
}

/// Table-aligned CSV, column set Position, Heading, Speed, Size, mADE, mFDE.
inline std::string realism_report_to_csv(const RealismReport & r)
{
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.mmd_position,
                r.mmd_heading, r.mmd_speed, r.mmd_size, r.made, r.mfde);
  return std::string("Position,Heading,Speed,Size,mADE,mFDE\n") + buf;
}

}  // namespace crashgen
