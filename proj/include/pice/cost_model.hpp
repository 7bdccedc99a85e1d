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

// Analytic cost quantities of progressive inference: the cloud latency curve
// f(l), the edge/cloud cost coefficient c, network transfer delay and the
// edge pool shape, plus the pipeline throughput bound and the end-to-end
// latency constraint that gates progressive mode.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pice/error.hpp"

namespace pice {

using Tokens = std::int64_t;
using Seconds = double;

struct LatencySample {
  double length = 0.0;  // output tokens
  Seconds latency = 0.0;

  friend bool operator==(const LatencySample&, const LatencySample&) = default;
};

// Piecewise-linear cloud generation time as a function of output length.
// Below the first sample the curve runs from the origin; beyond the last
// sample it extends with the final segment's slope. base_overhead is added
// everywhere, so eval(0) == base_overhead.
class LatencyModel {
 public:
  LatencyModel(std::vector<LatencySample> samples, Seconds base_overhead)
      : samples_(std::move(samples)), base_overhead_(base_overhead) {
    validate();
  }

  // A model with constant decode rate (tokens/s): f(l) = base + l / rate.
  static LatencyModel constant_rate(double tokens_per_second,
                                    Seconds base_overhead = 0.0,
                                    double span_tokens = 1000.0) {
    if (!(tokens_per_second > 0.0) || !std::isfinite(tokens_per_second)) {
      throw InvalidModelError("constant_rate: rate must be positive");
    }
    return LatencyModel({{span_tokens / 2.0, span_tokens / 2.0 / tokens_per_second},
                         {span_tokens, span_tokens / tokens_per_second}},
                        base_overhead);
  }

  const std::vector<LatencySample>& samples() const { return samples_; }
  Seconds base_overhead() const { return base_overhead_; }

  Seconds eval(double length) const {
    if (length < 0.0) {
      throw InvalidInputError("eval_latency: negative length");
    }
    return base_overhead_ + curve(length);
  }

  // Average seconds per token at a given length, excluding base overhead.
  double seconds_per_token(double length) const {
    if (!(length > 0.0)) {
      throw InvalidInputError("seconds_per_token: length must be positive");
    }
    return curve(length) / length;
  }

  friend bool operator==(const LatencyModel&, const LatencyModel&) = default;

 private:
  void validate() const {
    if (samples_.size() < 2) {
      throw InvalidModelError("LatencyModel needs at least two sample points");
    }
    if (!(base_overhead_ >= 0.0) || !std::isfinite(base_overhead_)) {
      throw InvalidModelError("LatencyModel base_overhead must be finite and >= 0");
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& s = samples_[i];
      if (!std::isfinite(s.length) || !std::isfinite(s.latency) ||
          s.length < 0.0 || s.latency < 0.0) {
        throw InvalidModelError("LatencyModel sample out of range");
      }
      if (i > 0) {
        if (!(s.length > samples_[i - 1].length)) {
          throw InvalidModelError("LatencyModel lengths must be strictly increasing");
        }
        if (s.latency < samples_[i - 1].latency) {
          throw InvalidModelError("LatencyModel latencies must be non-decreasing");
        }
      }
    }
  }

  static double lerp(const LatencySample& a, const LatencySample& b, double x) {
    double slope = (b.latency - a.latency) / (b.length - a.length);
    return a.latency + slope * (x - a.length);
  }

  double curve(double length) const {
    const auto& first = samples_.front();
    if (length <= first.length) {
      if (first.length == 0.0) return first.latency;
      return lerp({0.0, 0.0}, first, length);
    }
    if (length >= samples_.back().length) {
      return lerp(samples_[samples_.size() - 2], samples_.back(), length);
    }
    auto it = std::upper_bound(
        samples_.begin(), samples_.end(), length,
        [](double x, const LatencySample& s) { return x < s.length; });
    return lerp(*(it - 1), *it, length);
  }

  std::vector<LatencySample> samples_;
  Seconds base_overhead_;
};

inline Seconds eval_latency(const LatencyModel& model, double length) {
  return model.eval(length);
}

// Ratio of edge execution time to cloud execution time for the same output.
class CostCoefficient {
 public:
  explicit CostCoefficient(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw InvalidModelError("cost coefficient must be finite and > 0");
    }
  }
  double value() const { return value_; }
  friend bool operator==(const CostCoefficient&, const CostCoefficient&) = default;

 private:
  double value_;
};

struct NetworkModel {
  Seconds base_rtt = 0.02;
  double bandwidth = 1.0e7;  // bytes/s
  double bytes_per_token = 4.0;

  void validate() const {
    if (!(base_rtt > 0.0) || !(bandwidth > 0.0) || !(bytes_per_token > 0.0)) {
      throw InvalidModelError("NetworkModel fields must all be > 0");
    }
  }
};

inline Seconds network_delay(const NetworkModel& net, double payload_tokens) {
  if (payload_tokens < 0.0) {
    throw InvalidInputError("network_delay: negative payload");
  }
  return net.base_rtt + payload_tokens * net.bytes_per_token / net.bandwidth;
}

struct EdgePool {
  int device_count = 1;  // N
  int parallelism = 1;   // p

  void validate() const {
    if (device_count < 1 || parallelism < 1) {
      throw InvalidModelError("EdgePool needs device_count >= 1 and parallelism >= 1");
    }
  }
};

// Steady-state seconds per query of the three-stage pipeline (cloud sketch,
// transfer, parallel edge expansion). Throughput is 60 / bound queries/min.
inline Seconds pipeline_throughput_bound(double sketch_len, double answer_len,
                                         const LatencyModel& f,
                                         const CostCoefficient& c, int p,
                                         const NetworkModel& net) {
  if (p < 1) throw InvalidInputError("pipeline_throughput_bound: p must be >= 1");
  Seconds cloud = f.eval(sketch_len);
  Seconds transfer = network_delay(net, sketch_len);
  Seconds edge = c.value() / p * f.eval(answer_len);
  return std::max({cloud, transfer, edge});
}

inline double queries_per_minute(Seconds seconds_per_query) {
  return 60.0 / seconds_per_query;
}

struct Feasibility {
  bool feasible = false;
  Seconds slack = 0.0;  // budget f(l_i) minus estimated end-to-end latency
};

// End-to-end latency constraint for a progressive query:
//   f(|r|) + Δ(r) + c·f(l)/p + Σ_queue c·f(l_j)/(p·N) <= f(l)
inline Feasibility e2e_feasible(double sketch_len, double answer_len,
                                std::span<const Tokens> queue_lengths,
                                const LatencyModel& f, const CostCoefficient& c,
                                const EdgePool& pool, const NetworkModel& net) {
  if (!(answer_len > 0.0)) {
    throw InvalidInputError("e2e_feasible: expected answer length must be > 0");
  }
  if (sketch_len < 0.0 || sketch_len > answer_len) {
    throw InvalidInputError("e2e_feasible: sketch length must lie in [0, l_i]");
  }
  const double p = pool.parallelism;
  const double n = pool.device_count;
  double waiting = 0.0;
  for (Tokens l : queue_lengths) {
    waiting += c.value() * f.eval(static_cast<double>(l));
  }
  waiting /= p * n;
  const Seconds budget = f.eval(answer_len);
  const Seconds lhs = f.eval(sketch_len) + network_delay(net, sketch_len) +
                      c.value() * budget / p + waiting;
  return {lhs <= budget, budget - lhs};
}

// {"base_overhead_s": float, "samples": [[len, sec], ...]}
inline nlohmann::json to_json(const LatencyModel& m) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : m.samples()) samples.push_back({s.length, s.latency});
  return {{"base_overhead_s", m.base_overhead()}, {"samples", samples}};
}

inline LatencyModel latency_model_from_json(const nlohmann::json& j) {
  try {
    std::vector<LatencySample> samples;
    for (const auto& row : j.at("samples")) {
      if (!row.is_array() || row.size() != 2) {
        throw InvalidModelError("latency sample must be a [len, sec] pair");
      }
      samples.push_back({row[0].get<double>(), row[1].get<double>()});
    }
    return LatencyModel(std::move(samples), j.value("base_overhead_s", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModelError(std::string("bad latency model document: ") + e.what());
  }
}

inline nlohmann::json to_json(const NetworkModel& n) {
  return {{"base_rtt_s", n.base_rtt},
          {"bandwidth_Bps", n.bandwidth},
          {"bytes_per_token", n.bytes_per_token}};
}

inline NetworkModel network_model_from_json(const nlohmann::json& j) {
  NetworkModel n;
  n.base_rtt = j.value("base_rtt_s", n.base_rtt);
  n.bandwidth = j.value("bandwidth_Bps", n.bandwidth);
  n.bytes_per_token = j.value("bytes_per_token", n.bytes_per_token);
  n.validate();
  return n;
}

}  // namespace pice
