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
#include <map>
#include <string>
#include <vector>

#include "crashgen/rng.hpp"
#include "crashgen/sim.hpp"

namespace crashgen
{

// ---------------------------------------------------------------------------
// Scenario context features for the score head. Handcrafted, fixed layout:
//   [0]      ego speed * 0.1
//   [1..2]   cos/sin of ego world heading
//   then kNearestAgents blocks of 8 (zero-padded):
//   [dx, dy] * 0.05  relative position in the ego frame
//   [dvx, dvy] * 0.1 relative velocity in the ego frame
//   [cos, sin]       relative heading
//   [len, wid] * 0.2 agent dimensions
//   then kNearestLanes blocks of 4:
//   [cos, sin]       lane direction in the ego frame
//   [lat, along] * 0.05  ego offset from the segment start, lane frame

inline constexpr int kNearestAgents = 8;
inline constexpr int kNearestLanes = 4;
inline constexpr int kFeatureDim = 3 + 8 * kNearestAgents + 4 * kNearestLanes;

inline std::vector<double> build_feature_vector(const Scenario & scenario)
{
  const AgentTrack & ego = scenario.ego_track();
  const AgentPose & e0 = ego.poses.front();
  std::vector<double> f;
  f.reserve(kFeatureDim);
  f.push_back(e0.speed * 0.1);
  f.push_back(std::cos(e0.heading));
  f.push_back(std::sin(e0.heading));

  struct Neighbor
  {
    double dist;
    int agent_id;
    const AgentTrack * track;
  };
  std::vector<Neighbor> neighbors;
  for (const AgentTrack & t : scenario.tracks) {
    if (t.agent_id == kEgoAgentId) continue;
    neighbors.push_back({distance(t.poses.front().position, e0.position), t.agent_id, &t});
  }
  std::sort(neighbors.begin(), neighbors.end(), [](const Neighbor & a, const Neighbor & b) {
    return a.dist != b.dist ? a.dist < b.dist : a.agent_id < b.agent_id;
  });

  const Point2 ego_vel = e0.speed * heading_unit(e0.heading);
  for (int i = 0; i < kNearestAgents; ++i) {
    if (i < static_cast<int>(neighbors.size())) {
      const AgentTrack & t = *neighbors[static_cast<size_t>(i)].track;
      const AgentPose & p = t.poses.front();
      const Point2 rel = rotated(p.position - e0.position, -e0.heading);
      const Point2 rel_vel =
        rotated(p.speed * heading_unit(p.heading) - ego_vel, -e0.heading);
      const double rel_heading = normalize_angle(p.heading - e0.heading);
      f.push_back(rel.x * 0.05);
      f.push_back(rel.y * 0.05);
      f.push_back(rel_vel.x * 0.1);
      f.push_back(rel_vel.y * 0.1);
      f.push_back(std::cos(rel_heading));
      f.push_back(std::sin(rel_heading));
      f.push_back(t.length * 0.2);
      f.push_back(t.width * 0.2);
    } else {
      for (int j = 0; j < 8; ++j) f.push_back(0.0);
    }
  }

  struct NearLane
  {
    double dist;
    size_t index;
  };
  std::vector<NearLane> lanes;
  for (size_t i = 0; i < scenario.map.segments.size(); ++i) {
    lanes.push_back(
      {point_segment_distance(e0.position, scenario.map.segments[i].segment()), i});
  }
  std::sort(lanes.begin(), lanes.end(), [](const NearLane & a, const NearLane & b) {
    return a.dist != b.dist ? a.dist < b.dist : a.index < b.index;
  });
  for (int i = 0; i < kNearestLanes; ++i) {
    if (i < static_cast<int>(lanes.size())) {
      const LaneSegment & seg = scenario.map.segments[lanes[static_cast<size_t>(i)].index];
      const Point2 dir = seg.direction();
      const double lane_heading = std::atan2(dir.y, dir.x);
      const double rel_heading = normalize_angle(lane_heading - e0.heading);
      const Point2 off = rotated(e0.position - seg.start, -lane_heading);
      f.push_back(std::cos(rel_heading));
      f.push_back(std::sin(rel_heading));
      f.push_back(off.y * 0.05);  // lateral offset from the segment line
      f.push_back(off.x * 0.05);  // distance along the segment
    } else {
      for (int j = 0; j < 4; ++j) f.push_back(0.0);
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Feed-forward score head: tanh hidden layers, sigmoid outputs, one output
// per (vocabulary entry, metric).

inline constexpr double kBceClamp = 1e-7;

struct ScoreHeadModel
{
  std::vector<int> layer_sizes;  // e.g. {kFeatureDim, 64, 64, k * kMetricCount}
  std::vector<double> params;    // per layer: weights (out x in, row-major), then biases

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }

  static size_t param_count_for(const std::vector<int> & sizes)
  {
    size_t total = 0;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
      total += static_cast<size_t>(sizes[l + 1]) * static_cast<size_t>(sizes[l]) +
               static_cast<size_t>(sizes[l + 1]);
    }
    return total;
  }
};

/// Deterministic uniform initialization: weights in +-sqrt(6/(fan_in+fan_out)),
/// biases zero.
inline ScoreHeadModel make_score_head(const std::vector<int> & layer_sizes, uint64_t seed)
{
  if (layer_sizes.size() < 2) throw data_error("make_score_head: need at least 2 layer sizes");
  for (int s : layer_sizes) {
    if (s < 1) throw data_error("make_score_head: layer sizes must be >= 1");
  }
  ScoreHeadModel m;
  m.layer_sizes = layer_sizes;
  m.params.resize(ScoreHeadModel::param_count_for(layer_sizes));
  Rng rng(seed);
  size_t at = 0;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int in = layer_sizes[l];
    const int out = layer_sizes[l + 1];
    const double s = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < out * in; ++i) m.params[at++] = rng.uniform(-s, s);
    for (int i = 0; i < out; ++i) m.params[at++] = 0.0;
  }
  return m;
}

namespace detail
{

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct ForwardCache
{
  std::vector<std::vector<double>> activations;  // input + each layer output (pre-sigmoid last)
};

inline std::vector<double> forward_logits(const ScoreHeadModel & m, const std::vector<double> & x,
                                          ForwardCache * cache = nullptr)
{
  if (static_cast<int>(x.size()) != m.input_dim()) {
    throw data_error("score head: feature dimension mismatch (" + std::to_string(x.size()) +
                     " vs " + std::to_string(m.input_dim()) + ")");
  }
  std::vector<double> a = x;
  if (cache) cache->activations.assign(1, a);
  size_t at = 0;
  const size_t layers = m.layer_sizes.size() - 1;
  for (size_t l = 0; l < layers; ++l) {
    const int in = m.layer_sizes[l];
    const int out = m.layer_sizes[l + 1];
    std::vector<double> z(static_cast<size_t>(out));
    for (int o = 0; o < out; ++o) {
      double s = m.params[at + static_cast<size_t>(out) * static_cast<size_t>(in) +
                          static_cast<size_t>(o)];  // bias
      const size_t row = at + static_cast<size_t>(o) * static_cast<size_t>(in);
      for (int i = 0; i < in; ++i) s += m.params[row + static_cast<size_t>(i)] * a[static_cast<size_t>(i)];
      z[static_cast<size_t>(o)] = s;
    }
    at += static_cast<size_t>(out) * static_cast<size_t>(in) + static_cast<size_t>(out);
    if (l + 1 < layers) {
      for (double & v : z) v = std::tanh(v);
    }
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

}  // namespace detail

/// Sigmoid scores for every (entry, metric), flattened entry-major.
inline std::vector<double> predict_scores(const ScoreHeadModel & m, const std::vector<double> & x)
{
  std::vector<double> z = detail::forward_logits(m, x);
  for (double & v : z) v = detail::sigmoid(v);
  return z;
}

/// Summed binary cross-entropy over all (entry, metric) pairs. Predictions are
/// clamped to [1e-7, 1 - 1e-7] before the logs.
inline double bce_loss(const std::vector<double> & predicted, const std::vector<double> & target)
{
  if (predicted.size() != target.size()) {
    throw data_error("bce_loss: shape mismatch (" + std::to_string(predicted.size()) + " vs " +
                     std::to_string(target.size()) + ")");
  }
  double loss = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const double p = std::clamp(predicted[i], kBceClamp, 1.0 - kBceClamp);
    loss -= target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p);
  }
  return loss;
}

namespace detail
{

/// BCE loss of sigmoid(logits) vs target, and its gradient accumulated into
/// grad (d loss / d params), both scaled by `scale`. The gradient is taken
/// through the clamp: saturated outputs contribute zero.
inline double bce_backward(const ScoreHeadModel & m, const std::vector<double> & x,
                           const std::vector<double> & target, double scale,
                           std::vector<double> & grad)
{
  ForwardCache cache;
  const std::vector<double> logits = forward_logits(m, x, &cache);
  if (logits.size() != target.size()) {
    throw data_error("bce_backward: target size mismatch (" + std::to_string(target.size()) +
                     " vs " + std::to_string(logits.size()) + ")");
  }
  double loss = 0.0;
  std::vector<double> delta(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) {
    const double p = sigmoid(logits[i]);
    const double pc = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
    loss -= target[i] * std::log(pc) + (1.0 - target[i]) * std::log(1.0 - pc);
    delta[i] = (p == pc) ? (p - target[i]) : 0.0;
  }

  // Backpropagate through the dense layers.
  const size_t layers = m.layer_sizes.size() - 1;
  std::vector<size_t> offsets(layers);
  size_t at = 0;
  for (size_t l = 0; l < layers; ++l) {
    offsets[l] = at;
    at += static_cast<size_t>(m.layer_sizes[l + 1]) * static_cast<size_t>(m.layer_sizes[l]) +
          static_cast<size_t>(m.layer_sizes[l + 1]);
  }
  for (size_t l = layers; l-- > 0;) {
    const int in = m.layer_sizes[l];
    const int out = m.layer_sizes[l + 1];
    const std::vector<double> & input = cache.activations[l];
    std::vector<double> prev_delta(static_cast<size_t>(in), 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[static_cast<size_t>(o)] * scale;
      const size_t row = offsets[l] + static_cast<size_t>(o) * static_cast<size_t>(in);
      for (int i = 0; i < in; ++i) {
        grad[row + static_cast<size_t>(i)] += d * input[static_cast<size_t>(i)];
        prev_delta[static_cast<size_t>(i)] +=
          delta[static_cast<size_t>(o)] * m.params[row + static_cast<size_t>(i)];
      }
      grad[offsets[l] + static_cast<size_t>(out) * static_cast<size_t>(in) +
           static_cast<size_t>(o)] += d;
    }
    if (l > 0) {
      // Through the tanh of the previous layer's output.
      for (int i = 0; i < in; ++i) {
        const double a = cache.activations[l][static_cast<size_t>(i)];
        prev_delta[static_cast<size_t>(i)] *= (1.0 - a * a);
      }
      delta = std::move(prev_delta);
    }
  }
  return loss * scale;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ground-truth score tables.

/// scenario id -> k x 6 matrix of simulator sub-metric scores.
struct ScoreTable
{
  int vocab_k = 0;
  std::map<std::string, std::vector<std::array<double, kMetricCount>>> rows;

  friend bool operator==(const ScoreTable &, const ScoreTable &) = default;
};

inline ScoreTable build_score_table(const std::vector<std::pair<std::string, Scenario>> & dataset,
                                    const TrajectoryVocabulary & vocab, const SimConfig & cfg)
{
  ScoreTable table;
  table.vocab_k = vocab.k;
  for (const auto & [id, scenario] : dataset) {
    std::vector<std::array<double, kMetricCount>> matrix;
    try {
      for (const ScoreVector & v : score_vocabulary(scenario, vocab, cfg)) {
        matrix.push_back(to_array(v));
      }
    } catch (const std::exception & e) {
      throw data_error("build_score_table: scenario '" + id + "': " + e.what());
    }
    table.rows[id] = std::move(matrix);
  }
  return table;
}

inline const char * kMetricNames[kMetricCount] = {"nc", "dac", "ddc", "ttc", "comfort", "ep"};

inline void save_score_table(const ScoreTable & table, const std::filesystem::path & path)
{
  json scenarios = json::object();
  for (const auto & [id, matrix] : table.rows) {
    json rows = json::array();
    json pdm = json::array();
    int best = 0;
    double best_score = -1.0;
    for (size_t i = 0; i < matrix.size(); ++i) {
      rows.push_back(json(matrix[i]));
      const double score = pdm_score(score_from_array(matrix[i]));
      pdm.push_back(score);
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(i);
      }
    }
    scenarios[id] = {{"scores", rows}, {"pdm", pdm}, {"best_entry", best}};
  }
  json metrics = json::array();
  for (const char * name : kMetricNames) metrics.push_back(name);
  save_json_file(path, json{{"vocab_k", table.vocab_k},
                            {"metrics", metrics},
                            {"scenarios", scenarios}});
}

inline ScoreTable load_score_table(const std::filesystem::path & path)
{
  const json j = load_json_file(path);
  ScoreTable table;
  try {
    table.vocab_k = j.at("vocab_k").get<int>();
    for (const auto & [id, entry] : j.at("scenarios").items()) {
      std::vector<std::array<double, kMetricCount>> matrix;
      for (const json & row : entry.at("scores")) {
        if (!row.is_array() || row.size() != kMetricCount) {
          throw validation_error(path.string() + ": scenario '" + id +
                                 "': score row must have 6 entries");
        }
        std::array<double, kMetricCount> a{};
        for (int m = 0; m < kMetricCount; ++m) a[static_cast<size_t>(m)] = row[static_cast<size_t>(m)].get<double>();
        matrix.push_back(a);
      }
      if (static_cast<int>(matrix.size()) != table.vocab_k) {
        throw validation_error(path.string() + ": scenario '" + id + "' has " +
                               std::to_string(matrix.size()) + " rows, expected vocab_k=" +
                               std::to_string(table.vocab_k));
      }
      table.rows[id] = std::move(matrix);
    }
  } catch (const json::exception & e) {
    throw parse_error(path.string() + ": " + e.what());
  }
  return table;
}

// ---------------------------------------------------------------------------
// Training per the batch-mixing procedure: each step draws r in [0,1); r < p_R
// takes a regular batch with loss weight w_R, otherwise a collision batch with
// w_C; gradients of the weighted batch-mean loss update the parameters.

struct MixConfig
{
  double p_regular = 0.5;
  double w_regular = 1.0;
  double w_collision = 1.0;
};

/// "R:C" ratio shorthand, e.g. "10:1" -> p_regular = 10/11.
inline MixConfig mix_from_ratio(const std::string & ratio, double w_regular = 1.0,
                                double w_collision = 1.0)
{
  const size_t colon = ratio.find(':');
  if (colon == std::string::npos) throw parse_error("ratio must look like '10:1'");
  double r = 0.0;
  double c = 0.0;
  try {
    r = std::stod(ratio.substr(0, colon));
    c = std::stod(ratio.substr(colon + 1));
  } catch (const std::exception &) {
    throw parse_error("ratio must look like '10:1'");
  }
  if (r < 0.0 || c < 0.0 || r + c <= 0.0) throw validation_error("ratio parts must be >= 0, sum > 0");
  return {r / (r + c), w_regular, w_collision};
}

struct TrainConfig
{
  int steps = 500;        // Algorithm-1 iterations (one batch each)
  int batch_size = 32;    // scenarios per batch, drawn with replacement
  double learning_rate = 2e-4;
  bool use_adam = true;   // false = plain gradient descent
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  uint64_t seed = 0;
  std::vector<int> hidden_layers{64, 64};
};

/// Feature vectors and target score rows for one dataset, aligned by index.
struct TrainingSet
{
  std::vector<std::string> ids;
  std::vector<std::vector<double>> features;
  std::vector<std::vector<double>> targets;  // flattened k x 6, entry-major
};

inline TrainingSet make_training_set(const std::vector<std::pair<std::string, Scenario>> & dataset,
                                     const ScoreTable & table)
{
  TrainingSet set;
  for (const auto & [id, scenario] : dataset) {
    const auto it = table.rows.find(id);
    if (it == table.rows.end()) {
      throw data_error("make_training_set: no score table row for scenario '" + id + "'");
    }
    set.ids.push_back(id);
    set.features.push_back(build_feature_vector(scenario));
    std::vector<double> flat;
    flat.reserve(it->second.size() * kMetricCount);
    for (const std::array<double, kMetricCount> & row : it->second) {
      flat.insert(flat.end(), row.begin(), row.end());
    }
    set.targets.push_back(std::move(flat));
  }
  return set;
}

struct TrainStepLog
{
  int step = 0;
  int source = 0;  // 0 = regular, 1 = collision
  double loss = 0.0;
};

struct TrainResult
{
  ScoreHeadModel model;
  std::vector<TrainStepLog> log;
};

inline TrainResult train(const TrainingSet & regular, const TrainingSet & collision,
                         const MixConfig & mix, const TrainConfig & cfg)
{
  if (regular.features.empty()) throw data_error("train: regular dataset is empty");
  if (collision.features.empty()) throw data_error("train: collision dataset is empty");
  if (mix.p_regular < 0.0 || mix.p_regular > 1.0) throw validation_error("train: p_regular must be in [0,1]");
  if (!(mix.w_regular >= 0.0) || !(mix.w_collision >= 0.0)) {
    throw validation_error("train: loss weights must be finite and >= 0");
  }
  const size_t out_dim = regular.targets.front().size();
  for (const TrainingSet * set : {&regular, &collision}) {
    for (const std::vector<double> & t : set->targets) {
      if (t.size() != out_dim) throw data_error("train: score tables are not aligned (k mismatch)");
    }
  }

  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(regular.features.front().size()));
  for (int h : cfg.hidden_layers) sizes.push_back(h);
  sizes.push_back(static_cast<int>(out_dim));

  TrainResult result;
  result.model = make_score_head(sizes, Rng(cfg.seed).fork(0x696E6974).next());
  ScoreHeadModel & model = result.model;

  Rng rng = Rng(cfg.seed).fork(0x74726169);  // batch-mixing stream
  std::vector<double> grad(model.params.size());
  std::vector<double> adam_m(model.params.size(), 0.0);
  std::vector<double> adam_v(model.params.size(), 0.0);

  for (int step = 0; step < cfg.steps; ++step) {
    const double r = rng.uniform();
    const bool take_regular = r < mix.p_regular;
    const TrainingSet & set = take_regular ? regular : collision;
    const double weight = take_regular ? mix.w_regular : mix.w_collision;

    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    const double scale = weight / cfg.batch_size;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const size_t idx = rng.uniform_int(set.features.size());
      loss += detail::bce_backward(model, set.features[idx], set.targets[idx], scale, grad);
    }
    if (!std::isfinite(loss)) {
      throw data_error("train: NaN loss at step " + std::to_string(step));
    }
    result.log.push_back({step, take_regular ? 0 : 1, loss});

    if (cfg.use_adam) {
      const double t = step + 1;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
      for (size_t i = 0; i < model.params.size(); ++i) {
        adam_m[i] = cfg.adam_beta1 * adam_m[i] + (1.0 - cfg.adam_beta1) * grad[i];
        adam_v[i] = cfg.adam_beta2 * adam_v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
        model.params[i] -= cfg.learning_rate * (adam_m[i] / bc1) /
                           (std::sqrt(adam_v[i] / bc2) + cfg.adam_epsilon);
      }
    } else {
      for (size_t i = 0; i < model.params.size(); ++i) {
        model.params[i] -= cfg.learning_rate * grad[i];
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Trajectory selection.

struct PlanResult
{
  int index = 0;
  EgoTrajectory trajectory;  // vocabulary entry, ego frame
  std::array<double, kMetricCount> predicted{};
  double aggregated = 0.0;  // PDM formula over the predicted sub-scores
};

/// Select the vocabulary entry with the highest PDM-aggregated predicted
/// sub-scores; ties go to the lowest index.
inline PlanResult plan(const Scenario & scenario, const ScoreHeadModel & model,
                       const TrajectoryVocabulary & vocab)
{
  if (model.output_dim() != vocab.k * kMetricCount) {
    throw data_error("plan: model output dim " + std::to_string(model.output_dim()) +
                     " does not match vocabulary k=" + std::to_string(vocab.k) + " x 6");
  }
  const std::vector<double> scores = predict_scores(model, build_feature_vector(scenario));
  PlanResult best;
  best.index = -1;
  for (int i = 0; i < vocab.k; ++i) {
    std::array<double, kMetricCount> sub{};
    for (int m = 0; m < kMetricCount; ++m) {
      sub[static_cast<size_t>(m)] = scores[static_cast<size_t>(i * kMetricCount + m)];
    }
    const double agg = pdm_score(score_from_array(sub));
    if (best.index < 0 || agg > best.aggregated) {
      best.index = i;
      best.predicted = sub;
      best.aggregated = agg;
    }
  }
  best.trajectory = vocab.entries[static_cast<size_t>(best.index)];
  return best;
}

// ---------------------------------------------------------------------------
// Gradient verification for the hand-rolled backpropagation.

/// Max relative error between the analytic gradient and central differences
/// over every parameter, on one (features, target) sample.
/// relative error = |analytic - numeric| / (1e-3 + |analytic| + |numeric|);
/// the 1e-3 floor measures near-zero entries against the loss scale instead
/// of amplifying double-rounding noise into a pure ratio.
inline double finite_difference_check(const ScoreHeadModel & model,
                                      const std::vector<double> & features,
                                      const std::vector<double> & target, double epsilon)
{
  if (!(epsilon > 0.0) || epsilon > 1e-3) {
    throw data_error("finite_difference_check: epsilon must be in (0, 1e-3]");
  }
  std::vector<double> grad(model.params.size(), 0.0);
  detail::bce_backward(model, features, target, 1.0, grad);

  ScoreHeadModel probe = model;
  double max_rel = 0.0;
  for (size_t i = 0; i < probe.params.size(); ++i) {
    const double saved = probe.params[i];
    probe.params[i] = saved + epsilon;
    const double up = bce_loss(predict_scores(probe, features), target);
    probe.params[i] = saved - epsilon;
    const double down = bce_loss(predict_scores(probe, features), target);
    probe.params[i] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double rel =
      std::abs(grad[i] - numeric) / (1e-3 + std::abs(grad[i]) + std::abs(numeric));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

// ---------------------------------------------------------------------------
// Checkpoint file: layer sizes + flat parameters + the vocabulary the head
// was trained against, so evaluation needs only the checkpoint.

inline constexpr const char * kCheckpointFormat = "crashgen-score-head";
inline constexpr int kCheckpointVersion = 1;

struct ModelCheckpoint
{
  ScoreHeadModel model;
  TrajectoryVocabulary vocab;
};

inline void save_checkpoint(const ModelCheckpoint & ckpt, const std::filesystem::path & path)
{
  json vocab_entries = json::array();
  for (const EgoTrajectory & e : ckpt.vocab.entries) {
    json poses = json::array();
    for (const AgentPose & p : e.poses) poses.push_back(pose_to_json(p));
    vocab_entries.push_back(poses);
  }
  save_json_file(path,
                 json{{"format", kCheckpointFormat},
                      {"version", kCheckpointVersion},
                      {"layer_sizes", ckpt.model.layer_sizes},
                      {"params", ckpt.model.params},
                      {"vocab",
                       {{"k", ckpt.vocab.k},
                        {"entries", vocab_entries},
                        {"build_meta",
                         {{"sample_count", ckpt.vocab.build_meta.sample_count},
                          {"seed", ckpt.vocab.build_meta.seed},
                          {"iterations", ckpt.vocab.build_meta.iterations}}}}}});
}

inline ModelCheckpoint load_checkpoint(const std::filesystem::path & path)
{
  const json j = load_json_file(path);
  ModelCheckpoint ckpt;
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw validation_error(path.string() + ": not a score-head checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw validation_error(path.string() + ": unsupported checkpoint version");
    }
    ckpt.model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    ckpt.model.params = j.at("params").get<std::vector<double>>();
    ckpt.vocab = load_vocabulary_from_json(j.at("vocab"), path.string());
  } catch (const json::exception & e) {
    throw parse_error(path.string() + ": " + e.what());
  }
  if (ckpt.model.params.size() != ScoreHeadModel::param_count_for(ckpt.model.layer_sizes)) {
    throw validation_error(path.string() + ": parameter count does not match layer sizes");
  }
  return ckpt;
}

}  // namespace crashgen
