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
#include <string>
#include <vector>

#include "crashgen/rng.hpp"
#include "crashgen/scenario.hpp"

namespace crashgen
{

/// Heading weight in the clustering metric, meters per radian.
inline constexpr double kHeadingMetricWeight = 1.0;

struct VocabBuildMeta
{
  int sample_count = 0;
  uint64_t seed = 0;
  int iterations = 0;

  friend bool operator==(const VocabBuildMeta &, const VocabBuildMeta &) = default;
};

/// k cluster-center ego trajectories, each 40 poses in the ego frame at t=0
/// (first pose at the origin with zero heading).
struct TrajectoryVocabulary
{
  int k = 0;
  std::vector<EgoTrajectory> entries;
  VocabBuildMeta build_meta;

  friend bool operator==(const TrajectoryVocabulary &, const TrajectoryVocabulary &) = default;
};

/// Transform a pose window into the frame of its first pose.
inline EgoTrajectory to_local_frame(const std::vector<AgentPose> & window)
{
  EgoTrajectory out;
  out.poses.reserve(window.size());
  const AgentPose & anchor = window.front();
  for (const AgentPose & p : window) {
    AgentPose q;
    q.position = rotated(p.position - anchor.position, -anchor.heading);
    q.heading = normalize_angle(p.heading - anchor.heading);
    q.speed = p.speed;
    out.poses.push_back(q);
  }
  return out;
}

/// Draw n 40-pose ego windows from the corpus, each expressed in the frame of
/// its window-start pose. Deterministic given the seed.
inline std::vector<EgoTrajectory> sample_ego_trajectories(
  const std::vector<Scenario> & corpus, int n, uint64_t seed)
{
  if (n < 0) throw data_error("sample_ego_trajectories: n must be >= 0");
  if (corpus.empty()) throw data_error("sample_ego_trajectories: corpus too short (empty)");
  for (const Scenario & s : corpus) {
    if (s.horizon < kTrajectoryLength) {
      throw data_error("sample_ego_trajectories: corpus too short (scenario horizon " +
                       std::to_string(s.horizon) + " < " + std::to_string(kTrajectoryLength) + ")");
    }
  }
  Rng rng(seed);
  std::vector<EgoTrajectory> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Scenario & s = corpus[rng.uniform_int(corpus.size())];
    const AgentTrack & ego = s.ego_track();
    const int max_offset = s.horizon - kTrajectoryLength;  // inclusive
    const int offset = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(max_offset) + 1));
    std::vector<AgentPose> window(ego.poses.begin() + offset,
                                  ego.poses.begin() + offset + kTrajectoryLength);
    out.push_back(to_local_frame(window));
  }
  return out;
}

// ---------------------------------------------------------------------------
// K-means over trajectories flattened to 120-dim vectors (x, y, heading) per
// pose, heading weighted by kHeadingMetricWeight.

namespace detail
{

inline constexpr int kFlatDim = kTrajectoryLength * 3;

inline std::vector<double> flatten_trajectory(const EgoTrajectory & t)
{
  std::vector<double> v;
  v.reserve(kFlatDim);
  for (const AgentPose & p : t.poses) {
    v.push_back(p.position.x);
    v.push_back(p.position.y);
    v.push_back(p.heading * kHeadingMetricWeight);
  }
  return v;
}

inline EgoTrajectory unflatten_trajectory(const std::vector<double> & v)
{
  EgoTrajectory t;
  t.poses.resize(kTrajectoryLength);
  for (int i = 0; i < kTrajectoryLength; ++i) {
    AgentPose & p = t.poses[static_cast<size_t>(i)];
    p.position = {v[static_cast<size_t>(3 * i)], v[static_cast<size_t>(3 * i + 1)]};
    p.heading = v[static_cast<size_t>(3 * i + 2)] / kHeadingMetricWeight;
  }
  // Cluster means have no speed channel; recover it from step displacements.
  for (int i = 0; i < kTrajectoryLength; ++i) {
    if (i + 1 < kTrajectoryLength) {
      t.poses[static_cast<size_t>(i)].speed =
        distance(t.poses[static_cast<size_t>(i + 1)].position,
                 t.poses[static_cast<size_t>(i)].position) /
        kTrajectoryTimestep;
    } else {
      t.poses[static_cast<size_t>(i)].speed = t.poses[static_cast<size_t>(i - 1)].speed;
    }
  }
  return t;
}

inline double squared_dist(const std::vector<double> & a, const std::vector<double> & b)
{
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

struct KMeansResult
{
  TrajectoryVocabulary vocabulary;
  std::vector<int> assignment;          // final assignment, point index -> center index
  std::vector<double> inertia_history;  // inertia at each assignment step
};

/// Lloyd's algorithm with k-means++ seeding. Ties in assignment go to the
/// lowest center index; an emptied cluster is re-seeded to the point farthest
/// from its assigned center. Stops when every center moves < 1e-6 or at
/// max_iters. Deterministic given (points, k, seed).
inline KMeansResult kmeans_cluster_detailed(const std::vector<EgoTrajectory> & points, int k,
                                            uint64_t seed, int max_iters = 100)
{
  const int n = static_cast<int>(points.size());
  if (k < 1) throw data_error("kmeans_cluster: k must be >= 1");
  if (k > n) {
    throw data_error("kmeans_cluster: k (" + std::to_string(k) + ") exceeds point count (" +
                     std::to_string(n) + ")");
  }
  if (max_iters < 1) throw data_error("kmeans_cluster: max_iters must be >= 1");

  std::vector<std::vector<double>> flat;
  flat.reserve(static_cast<size_t>(n));
  for (const EgoTrajectory & t : points) {
    if (static_cast<int>(t.poses.size()) != kTrajectoryLength) {
      throw validation_error("kmeans_cluster: trajectory must have exactly 40 poses");
    }
    flat.push_back(detail::flatten_trajectory(t));
  }

  Rng rng(seed);
  // k-means++ seeding: D^2-weighted selection.
  std::vector<std::vector<double>> centers;
  centers.reserve(static_cast<size_t>(k));
  centers.push_back(flat[rng.uniform_int(static_cast<uint64_t>(n))]);
  std::vector<double> d2(static_cast<size_t>(n));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto & center : centers) {
        best = std::min(best, detail::squared_dist(flat[static_cast<size_t>(i)], center));
      }
      d2[static_cast<size_t>(i)] = best;
      total += best;
    }
    size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = static_cast<size_t>(n) - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2[static_cast<size_t>(i)];
        if (acc >= r) {
          pick = static_cast<size_t>(i);
          break;
        }
      }
    } else {
      pick = rng.uniform_int(static_cast<uint64_t>(n));
    }
    centers.push_back(flat[pick]);
  }

  std::vector<int> assignment(static_cast<size_t>(n), 0);
  std::vector<double> inertia_history;
  int iterations = 0;
  for (int iter = 0; iter < max_iters; ++iter) {
    ++iterations;
    // Assignment step.
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double d =
          detail::squared_dist(flat[static_cast<size_t>(i)], centers[static_cast<size_t>(c)]);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      assignment[static_cast<size_t>(i)] = best_c;
      inertia += best;
    }
    inertia_history.push_back(inertia);

    // Re-seed emptied clusters to the farthest point from its own center.
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (int a : assignment) ++counts[static_cast<size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) continue;
      double far_d = -1.0;
      int far_i = -1;
      for (int i = 0; i < n; ++i) {
        if (counts[static_cast<size_t>(assignment[static_cast<size_t>(i)])] <= 1) continue;
        const double d = detail::squared_dist(
          flat[static_cast<size_t>(i)], centers[static_cast<size_t>(assignment[static_cast<size_t>(i)])]);
        if (d > far_d) {
          far_d = d;
          far_i = i;
        }
      }
      if (far_i < 0) continue;  // every cluster singleton; nothing to steal
      --counts[static_cast<size_t>(assignment[static_cast<size_t>(far_i)])];
      assignment[static_cast<size_t>(far_i)] = c;
      counts[static_cast<size_t>(c)] = 1;
      centers[static_cast<size_t>(c)] = flat[static_cast<size_t>(far_i)];
    }

    // Update step: arithmetic means in fixed point order.
    std::vector<std::vector<double>> sums(static_cast<size_t>(k),
                                          std::vector<double>(detail::kFlatDim, 0.0));
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      const int c = assignment[static_cast<size_t>(i)];
      ++counts[static_cast<size_t>(c)];
      for (int d = 0; d < detail::kFlatDim; ++d) {
        sums[static_cast<size_t>(c)][static_cast<size_t>(d)] +=
          flat[static_cast<size_t>(i)][static_cast<size_t>(d)];
      }
    }
    double max_move2 = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) continue;
      std::vector<double> next(detail::kFlatDim);
      for (int d = 0; d < detail::kFlatDim; ++d) {
        next[static_cast<size_t>(d)] =
          sums[static_cast<size_t>(c)][static_cast<size_t>(d)] / counts[static_cast<size_t>(c)];
      }
      max_move2 = std::max(max_move2, detail::squared_dist(next, centers[static_cast<size_t>(c)]));
      centers[static_cast<size_t>(c)] = std::move(next);
    }
    if (max_move2 < 1e-6 * 1e-6) break;
  }

  KMeansResult result;
  result.assignment = assignment;
  result.inertia_history = std::move(inertia_history);
  result.vocabulary.k = k;
  result.vocabulary.entries.reserve(static_cast<size_t>(k));
  for (int c = 0; c < k; ++c) {
    result.vocabulary.entries.push_back(
      detail::unflatten_trajectory(centers[static_cast<size_t>(c)]));
  }
  result.vocabulary.build_meta = {n, seed, iterations};
  return result;
}

inline TrajectoryVocabulary kmeans_cluster(const std::vector<EgoTrajectory> & points, int k,
                                           uint64_t seed, int max_iters = 100)
{
  return kmeans_cluster_detailed(points, k, seed, max_iters).vocabulary;
}

/// Total squared distance from each point to its nearest vocabulary entry.
inline double vocabulary_inertia(const TrajectoryVocabulary & vocab,
                                 const std::vector<EgoTrajectory> & points)
{
  double total = 0.0;
  for (const EgoTrajectory & p : points) {
    const std::vector<double> fp = detail::flatten_trajectory(p);
    double best = std::numeric_limits<double>::infinity();
    for (const EgoTrajectory & e : vocab.entries) {
      best = std::min(best, detail::squared_dist(fp, detail::flatten_trajectory(e)));
    }
    total += best;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Vocabulary file: JSON with k, flattened pose entries, build metadata.

inline void save_vocabulary(const TrajectoryVocabulary & vocab, const std::filesystem::path & path)
{
  json entries = json::array();
  for (const EgoTrajectory & e : vocab.entries) {
    json poses = json::array();
    for (const AgentPose & p : e.poses) poses.push_back(pose_to_json(p));
    entries.push_back(poses);
  }
  save_json_file(path, json{{"k", vocab.k},
                            {"entries", entries},
                            {"build_meta",
                             {{"sample_count", vocab.build_meta.sample_count},
                              {"seed", vocab.build_meta.seed},
                              {"iterations", vocab.build_meta.iterations}}}});
}

inline TrajectoryVocabulary load_vocabulary_from_json(const json & j, const std::string & origin)
{
  TrajectoryVocabulary vocab;
  try {
    vocab.k = j.at("k").get<int>();
    for (const json & je : j.at("entries")) {
      EgoTrajectory e;
      for (const json & jp : je) e.poses.push_back(pose_from_json(jp));
      vocab.entries.push_back(std::move(e));
    }
    const json & meta = j.at("build_meta");
    vocab.build_meta = {meta.at("sample_count").get<int>(), meta.at("seed").get<uint64_t>(),
                        meta.at("iterations").get<int>()};
  } catch (const json::exception & e) {
    throw parse_error(origin + ": " + e.what());
  }
  if (vocab.k != static_cast<int>(vocab.entries.size())) {
    throw validation_error(origin + ": k (" + std::to_string(vocab.k) +
                           ") does not match entry count (" + std::to_string(vocab.entries.size()) +
                           ")");
  }
  for (size_t i = 0; i < vocab.entries.size(); ++i) {
    if (static_cast<int>(vocab.entries[i].poses.size()) != kTrajectoryLength) {
      throw validation_error(origin + ": entries[" + std::to_string(i) + "] must have exactly " +
                             std::to_string(kTrajectoryLength) + " poses");
    }
  }
  if (!vocab.entries.empty()) {
    const AgentPose & first = vocab.entries.front().poses.front();
    if (norm(first.position) > 1e-9 || std::abs(first.heading) > 1e-9) {
      throw validation_error(origin + ": entry 0 must start at the origin with zero heading");
    }
  }
  return vocab;
}

inline TrajectoryVocabulary load_vocabulary(const std::filesystem::path & path)
{
  return load_vocabulary_from_json(load_json_file(path), path.string());
}

}  // namespace crashgen
