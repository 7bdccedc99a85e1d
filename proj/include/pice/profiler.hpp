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

#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pice/cost_model.hpp"
#include "pice/error.hpp"

namespace pice {

struct MeasurementSample {
  std::string model_id;
  std::string device_id;
  Tokens output_length = 0;
  Seconds wall_time = 0.0;
};

// Point-in-time view of the serving system handed to the scheduler.
struct RuntimeSnapshot {
  std::vector<Tokens> queue_lengths;  // expected l_j of queued jobs
  int busy_devices = 0;
  Seconds observed_rtt = 0.0;
  Seconds timestamp = 0.0;
};

namespace detail {

// Pool-adjacent-violators: least-squares non-decreasing fit, weighted.
inline std::vector<double> isotonic(const std::vector<double>& y,
                                    const std::vector<double>& w) {
  struct Block {
    double value, weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w[i], 1});
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].value > blocks.back().value) {
      Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      double wt = a.weight + b.weight;
      a.value = (a.value * a.weight + b.value * b.weight) / wt;
      a.weight = wt;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.value);
  return out;
}

}  // namespace detail

// Fits f(l) for a single (model, device) pair. Repeated lengths are averaged
// first; the least-squares intercept becomes the base overhead and the
// residual curve is forced non-negative and non-decreasing.
inline LatencyModel fit_latency_model(const std::vector<MeasurementSample>& samples) {
  if (samples.empty()) throw InsufficientDataError("no measurement samples");
  const auto& key_model = samples.front().model_id;
  const auto& key_device = samples.front().device_id;
  std::map<Tokens, std::pair<double, int>> by_length;
  for (const auto& s : samples) {
    if (s.model_id != key_model || s.device_id != key_device) {
      throw InvalidInputError("fit_latency_model: samples span several (model, device) pairs");
    }
    if (s.output_length <= 0 || !(s.wall_time > 0.0)) {
      throw InvalidInputError("measurement sample needs output_length > 0 and wall_time > 0");
    }
    auto& [sum, n] = by_length[s.output_length];
    sum += s.wall_time;
    ++n;
  }
  if (by_length.size() < 2) {
    throw InsufficientDataError("need at least two distinct output lengths for " +
                                key_model + "@" + key_device);
  }

  std::vector<double> xs, ys, ws;
  for (const auto& [len, acc] : by_length) {
    xs.push_back(static_cast<double>(len));
    ys.push_back(acc.first / acc.second);
    ws.push_back(acc.second);
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  const double base = std::max(0.0, my - slope * mx);

  std::vector<double> residual(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) residual[i] = std::max(0.0, ys[i] - base);
  residual = detail::isotonic(residual, ws);

  std::vector<LatencySample> points;
  for (std::size_t i = 0; i < xs.size(); ++i) points.push_back({xs[i], residual[i]});
  return LatencyModel(std::move(points), base);
}

// Groups samples by (model_id, device_id) and fits each pair.
inline std::map<std::pair<std::string, std::string>, LatencyModel> fit_latency_models(
    const std::vector<MeasurementSample>& samples) {
  std::map<std::pair<std::string, std::string>, std::vector<MeasurementSample>> groups;
  for (const auto& s : samples) groups[{s.model_id, s.device_id}].push_back(s);
  std::map<std::pair<std::string, std::string>, LatencyModel> out;
  for (const auto& [key, group] : groups) out.emplace(key, fit_latency_model(group));
  return out;
}

// c = median over probe lengths of edge(l) / cloud(l).
inline CostCoefficient estimate_cost_coefficient(const LatencyModel& cloud,
                                                 const LatencyModel& edge,
                                                 const std::vector<double>& probe_lengths) {
  if (probe_lengths.empty()) throw InvalidInputError("no probe lengths");
  std::vector<double> ratios;
  ratios.reserve(probe_lengths.size());
  for (double l : probe_lengths) {
    double denom = cloud.eval(l);
    if (denom == 0.0) {
      throw DivisionError("cloud latency is zero at probe length " + std::to_string(l));
    }
    ratios.push_back(edge.eval(l) / denom);
  }
  std::sort(ratios.begin(), ratios.end());
  const std::size_t mid = ratios.size() / 2;
  double median = ratios.size() % 2 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
  return CostCoefficient(median);
}

// Any world exposing the four accessors below can be snapshotted. The
// simulator only calls this between events, so the view is consistent.
template <typename World>
RuntimeSnapshot snapshot(const World& world) {
  RuntimeSnapshot snap;
  snap.queue_lengths = world.queue_token_load();
  snap.busy_devices = world.busy_device_count();
  snap.observed_rtt = world.observed_rtt();
  snap.timestamp = world.now();
  return snap;
}

// One record per line: {model_id, device_id, output_length, wall_time_s}.
inline std::vector<MeasurementSample> read_measurements(std::istream& in) {
  std::vector<MeasurementSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      MeasurementSample s;
      s.model_id = j.at("model_id").get<std::string>();
      s.device_id = j.at("device_id").get<std::string>();
      s.output_length = j.at("output_length").get<Tokens>();
      s.wall_time = j.at("wall_time_s").get<double>();
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInputError("measurements line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline nlohmann::json to_json(const MeasurementSample& s) {
  return {{"model_id", s.model_id},
          {"device_id", s.device_id},
          {"output_length", s.output_length},
          {"wall_time_s", s.wall_time}};
}

inline nlohmann::json to_json(const RuntimeSnapshot& s) {
  return {{"queue_lengths", s.queue_lengths},
          {"busy_devices", s.busy_devices},
          {"observed_rtt_s", s.observed_rtt},
          {"timestamp_s", s.timestamp}};
}

}  // namespace pice
