/* Copyright 2026 The PICE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Cloud-side decisions: answer-length prediction, sketch-level selection
// under the end-to-end latency constraint, and lexicographic ranking of
// configurations over the five serving metrics.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pice/cost_model.hpp"
#include "pice/error.hpp"
#include "pice/profiler.hpp"
#include "pice/random.hpp"

namespace pice {

struct Query {
  std::string id;
  std::string text;
  Seconds arrival_time = 0.0;
  std::string category = "generic";
  Tokens true_answer_length = 0;  // trace ground truth; never read by the scheduler
};

struct PredictorConfig {
  bool enabled = true;
  double sigma = 0.1;  // log-normal multiplicative noise
  std::uint64_t seed = 0;
};

// l_i: the trace length perturbed by log-normal noise, at least one token.
inline Tokens predict_answer_length(const Query& q, const PredictorConfig& cfg) {
  if (!cfg.enabled || cfg.sigma == 0.0) return std::max<Tokens>(1, q.true_answer_length);
  Rng rng(mix_seed({cfg.seed, stable_hash(q.id), 0x6c656e677468ull}));
  double scaled = static_cast<double>(q.true_answer_length) * std::exp(cfg.sigma * rng.normal());
  return std::max<Tokens>(1, static_cast<Tokens>(std::llround(scaled)));
}

enum class Mode { kFullCloud, kProgressive };

inline const char* to_string(Mode m) {
  return m == Mode::kFullCloud ? "full_cloud" : "progressive";
}

struct SketchDecision {
  Mode mode = Mode::kFullCloud;
  int level_index = 0;
  Tokens target_sketch_len = 0;
  Tokens expected_answer_len = 0;
  Seconds slack = 0.0;
};

// Minimum sketch fraction for an edge model of the given capability rank
// (0 = largest model). Weaker models need longer sketches.
inline double tier_floor(int capability_rank) {
  return std::min(1.0, 0.2 + 0.1 * std::max(0, capability_rank));
}

inline Tokens level_length(Tokens expected_len, int level, int level_count) {
  return static_cast<Tokens>(std::llround(static_cast<double>(level) *
                                          static_cast<double>(expected_len) /
                                          static_cast<double>(level_count + 1)));
}

// Level k of L targets round(k·l_i/(L+1)) tokens. Every level is checked
// against the latency constraint with p = 1; the shortest feasible level at
// or above the tier floor wins, and with none the query goes full-cloud.
inline SketchDecision choose_sketch_level(Tokens expected_len, int level_count,
                                          const RuntimeSnapshot& snap, const LatencyModel& f,
                                          const CostCoefficient& c, const EdgePool& pool,
                                          const NetworkModel& net, int capability_rank) {
  if (level_count < 1) throw InvalidInputError("choose_sketch_level: need at least one level");
  if (expected_len < 1) throw InvalidInputError("choose_sketch_level: l_i must be >= 1");
  const EdgePool conservative{pool.device_count, 1};
  const double floor_len = tier_floor(capability_rank) * static_cast<double>(expected_len);

  SketchDecision d;
  d.expected_answer_len = expected_len;
  bool have_slack = false;
  for (int k = 1; k <= level_count; ++k) {
    const Tokens len = level_length(expected_len, k, level_count);
    if (len <= 0) continue;
    auto feas = e2e_feasible(static_cast<double>(len), static_cast<double>(expected_len),
                             snap.queue_lengths, f, c, conservative, net);
    if (!have_slack) {
      d.slack = feas.slack;
      have_slack = true;
    }
    if (feas.feasible && static_cast<double>(len) >= floor_len) {
      d.mode = Mode::kProgressive;
      d.level_index = k;
      d.target_sketch_len = len;
      d.slack = feas.slack;
      return d;
    }
  }
  return d;
}

inline nlohmann::json to_json(const SketchDecision& d, const std::string& query_id) {
  return {{"query_id", query_id},
          {"mode", to_string(d.mode)},
          {"level_index", d.level_index},
          {"target_sketch_len", d.target_sketch_len},
          {"l_i", d.expected_answer_len},
          {"slack_s", d.slack}};
}

// ---------------------------------------------------------------------------
// Metrics and lexicographic selection

enum class Metric { kError = 0, kThroughput, kLatency, kServerCost, kEdgeCost };
inline constexpr std::size_t kMetricCount = 5;

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::kError: return "error";
    case Metric::kThroughput: return "throughput";
    case Metric::kLatency: return "latency";
    case Metric::kServerCost: return "server_cost";
    case Metric::kEdgeCost: return "edge_cost";
  }
  return "?";
}

inline Metric metric_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    if (s == to_string(static_cast<Metric>(i))) return static_cast<Metric>(i);
  }
  throw ConfigError("unknown metric '" + s + "'");
}

struct MetricVector {
  double error = 0.0;       // [0, 1]
  double throughput = 0.0;  // queries/min
  Seconds latency = 0.0;    // mean end-to-end
  double server_cost = 0.0; // tokens generated in the cloud
  double edge_cost = 0.0;   // tokens generated at the edge

  double get(Metric m) const {
    switch (m) {
      case Metric::kError: return error;
      case Metric::kThroughput: return throughput;
      case Metric::kLatency: return latency;
      case Metric::kServerCost: return server_cost;
      case Metric::kEdgeCost: return edge_cost;
    }
    return 0.0;
  }
  double& at(Metric m) {
    switch (m) {
      case Metric::kError: return error;
      case Metric::kThroughput: return throughput;
      case Metric::kLatency: return latency;
      case Metric::kServerCost: return server_cost;
      case Metric::kEdgeCost: return edge_cost;
    }
    return error;
  }
};

enum class Sense { kMinimize, kMaximize };

struct LexOrder {
  std::vector<Metric> priority{Metric::kThroughput, Metric::kLatency, Metric::kError,
                               Metric::kServerCost, Metric::kEdgeCost};
  std::array<Sense, kMetricCount> senses{Sense::kMinimize, Sense::kMaximize, Sense::kMinimize,
                                         Sense::kMinimize, Sense::kMinimize};
  double slack_fraction = 0.01;

  Sense sense(Metric m) const { return senses[static_cast<std::size_t>(m)]; }

  void validate() const {
    std::array<int, kMetricCount> seen{};
    for (Metric m : priority) ++seen[static_cast<std::size_t>(m)];
    for (int s : seen) {
      if (s != 1) throw ConfigError("lexicographic priority must list each metric exactly once");
    }
    if (!(slack_fraction >= 0.0)) throw ConfigError("slack fraction must be >= 0");
  }
};

// Index of the lexicographic optimum. At each metric in priority order only
// candidates within slack_fraction (relative) of the best surviving value
// are kept; the lowest surviving index wins.
inline std::size_t lex_optimize_index(std::span<const MetricVector> metrics,
                                      const LexOrder& order) {
  if (metrics.empty()) throw InvalidInputError("lex_optimize: no candidates");
  order.validate();
  std::vector<std::size_t> alive(metrics.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
  for (Metric m : order.priority) {
    const bool maximize = order.sense(m) == Sense::kMaximize;
    double best = metrics[alive.front()].get(m);
    for (std::size_t i : alive) {
      double v = metrics[i].get(m);
      best = maximize ? std::max(best, v) : std::min(best, v);
    }
    const double tol = order.slack_fraction * std::abs(best);
    std::vector<std::size_t> next;
    for (std::size_t i : alive) {
      double v = metrics[i].get(m);
      bool keep = order.slack_fraction == 0.0 ? v == best
                  : maximize                  ? v >= best - tol
                                              : v <= best + tol;
      if (keep) next.push_back(i);
    }
    alive = std::move(next);
  }
  return alive.front();
}

template <typename Config>
const Config& lex_optimize(std::span<const std::pair<Config, MetricVector>> candidates,
                           const LexOrder& order) {
  std::vector<MetricVector> metrics;
  metrics.reserve(candidates.size());
  for (const auto& c : candidates) metrics.push_back(c.second);
  return candidates[lex_optimize_index(metrics, order)].first;
}

struct QueryOutcome {
  Seconds e2e_latency = 0.0;
  std::optional<double> rouge_vs_reference;
};

struct RunSummary {
  std::vector<QueryOutcome> completed;
  Seconds window = 0.0;
  double server_tokens = 0.0;
  double edge_tokens = 0.0;
};

// Error is the mean (1 - ROUGE-L) against references where they exist,
// standing in for the expected task error; 0 when nothing has a reference.
inline MetricVector measure(const RunSummary& run) {
  if (!(run.window > 0.0) || run.completed.empty()) {
    throw UndefinedMetricsError("measure: empty measurement window");
  }
  MetricVector m;
  m.throughput = static_cast<double>(run.completed.size()) / (run.window / 60.0);
  double lat = 0.0, err = 0.0;
  std::size_t scored = 0;
  for (const auto& q : run.completed) {
    lat += q.e2e_latency;
    if (q.rouge_vs_reference) {
      err += 1.0 - *q.rouge_vs_reference;
      ++scored;
    }
  }
  m.latency = lat / static_cast<double>(run.completed.size());
  m.error = scored ? err / static_cast<double>(scored) : 0.0;
  m.server_cost = run.server_tokens;
  m.edge_cost = run.edge_tokens;
  return m;
}

inline nlohmann::json to_json(const MetricVector& m) {
  return {{"error", m.error},
          {"throughput_qpm", m.throughput},
          {"latency_s", m.latency},
          {"server_cost_tokens", m.server_cost},
          {"edge_cost_tokens", m.edge_cost}};
}

inline nlohmann::json to_json(const LexOrder& o) {
  nlohmann::json pri = nlohmann::json::array(), senses = nlohmann::json::object();
  for (Metric m : o.priority) pri.push_back(to_string(m));
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    senses[to_string(static_cast<Metric>(i))] =
        o.senses[i] == Sense::kMaximize ? "maximize" : "minimize";
  }
  return {{"priority", pri}, {"senses", senses}, {"slack_fraction", o.slack_fraction}};
}

inline LexOrder lex_order_from_json(const nlohmann::json& j) {
  LexOrder o;
  if (j.contains("priority")) {
    o.priority.clear();
    for (const auto& s : j.at("priority")) o.priority.push_back(metric_from_string(s.get<std::string>()));
  }
  if (j.contains("senses")) {
    for (const auto& [name, v] : j.at("senses").items()) {
      auto s = v.get<std::string>();
      if (s != "minimize" && s != "maximize") throw ConfigError("sense must be minimize|maximize");
      o.senses[static_cast<std::size_t>(metric_from_string(name))] =
          s == "maximize" ? Sense::kMaximize : Sense::kMinimize;
    }
  }
  o.slack_fraction = j.value("slack_fraction", o.slack_fraction);
  o.validate();
  return o;
}

}  // namespace pice
