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

// Run configuration for the simulator: workload, cloud, edge pool, network,
// queue and scheduler settings. Every field has a default, so "{}" is a
// valid config describing the reference cluster.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pice/backends.hpp"
#include "pice/cloud_scheduler.hpp"
#include "pice/cost_model.hpp"
#include "pice/dispatcher.hpp"
#include "pice/ensemble.hpp"
#include "pice/error.hpp"

namespace pice::sim {

enum class Policy { kPice, kCloudOnly, kEdgeOnly, kRouting };

inline const char* to_string(Policy p) {
  switch (p) {
    case Policy::kPice: return "pice";
    case Policy::kCloudOnly: return "cloud_only";
    case Policy::kEdgeOnly: return "edge_only";
    case Policy::kRouting: return "routing";
  }
  return "?";
}

inline Policy policy_from_string(const std::string& s) {
  for (Policy p : {Policy::kPice, Policy::kCloudOnly, Policy::kEdgeOnly, Policy::kRouting}) {
    if (s == to_string(p)) return p;
  }
  throw ConfigError("unknown policy '" + s + "' (expected pice, cloud_only, edge_only or routing)");
}

enum class Arrival { kDeterministic, kPoisson };

struct LengthDistribution {
  double mean = 500.0;   // tokens
  double sigma = 0.3;    // log-normal shape
  Tokens min = 50;
  Tokens max = 2000;
};

struct WorkloadSpec {
  double rpm = 30.0;
  Seconds duration = 1200.0;
  Arrival arrival = Arrival::kDeterministic;
  LengthDistribution lengths;
  std::map<std::string, double> category_mix{{"generic", 1.0}};
  PredictorConfig predictor;

  void validate() const {
    if (!(rpm > 0.0)) throw ConfigError("workload.rpm must be > 0");
    if (!(duration > 0.0)) throw ConfigError("workload.duration_s must be > 0");
    if (!(lengths.mean > 0.0) || lengths.sigma < 0.0 || lengths.min < 1 ||
        lengths.max < lengths.min) {
      throw ConfigError("invalid workload.lengths");
    }
    double total = 0.0;
    for (const auto& [k, w] : category_mix) {
      if (w < 0.0) throw ConfigError("category weights must be >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw ConfigError("category_mix needs a positive weight");
  }
};

struct CloudSpec {
  MockModelSpec model{"llama3-70b", 18.82, 0.95, 2.5, 1, 0.0, 0.0};
  int max_batch = 20;
  double batch_slowdown = 0.093;
  Seconds base_overhead = 0.2;
};

struct EdgeModel {
  MockModelSpec spec;
  int size_rank = 0;
};

struct EdgeSpec {
  std::vector<DeviceProfile> devices;
  std::vector<EdgeModel> models;  // smallest first
  Seconds switch_penalty = 5.0;
  std::string tier_model;         // sets the sketch floor; defaults to the first device's model
  Tokens prompt_overhead_tokens = 48;
};

struct QueueSpec {
  std::size_t capacity = 4;
  std::vector<Tokens> bucket_edges{100, 250, 500};
};

struct SchedulerSpec {
  int sketch_levels = 4;
  std::vector<double> profile_lengths{50, 100, 200, 400, 800, 1600};
  LexOrder lex;
};

struct SimConfig {
  std::uint64_t seed = 42;
  Policy policy = Policy::kPice;
  WorkloadSpec workload;
  CloudSpec cloud;
  EdgeSpec edge;
  NetworkModel net;
  QueueSpec queue;
  SchedulerSpec scheduler;
  ConfidenceWeights weights;
  Tokens routing_threshold = 150;
  bool drain = false;  // keep running past the window until every query finishes

  void validate() const {
    workload.validate();
    cloud.model.validate();
    if (cloud.max_batch < 1) throw ConfigError("cloud.max_batch must be >= 1");
    if (cloud.batch_slowdown < 0.0 || cloud.base_overhead < 0.0) {
      throw ConfigError("cloud slowdown and overhead must be >= 0");
    }
    net.validate();
    weights.validate();
    scheduler.lex.validate();
    if (scheduler.sketch_levels < 1) throw ConfigError("scheduler.sketch_levels must be >= 1");
    if (scheduler.profile_lengths.size() < 2) {
      throw ConfigError("scheduler.profile_lengths needs at least two lengths");
    }
    if (queue.capacity < 1) throw ConfigError("queue.capacity must be >= 1");
    if (routing_threshold < 0) throw ConfigError("routing_threshold must be >= 0");
    const bool needs_edge = policy != Policy::kCloudOnly;
    if (needs_edge && edge.devices.empty()) {
      throw ConfigError(std::string("policy ") + to_string(policy) + " needs at least one edge device");
    }
    if (needs_edge && edge.models.empty()) throw ConfigError("edge catalog is empty");
    for (std::size_t i = 0; i < edge.models.size(); ++i) {
      edge.models[i].spec.validate();
      if (i > 0 && edge.models[i].size_rank < edge.models[i - 1].size_rank) {
        throw ConfigError("edge models must be listed smallest first");
      }
    }
    auto known = [&](const std::string& id) {
      for (const auto& m : edge.models) {
        if (m.spec.model_id == id) return true;
      }
      return false;
    };
    for (const auto& d : edge.devices) {
      if (d.max_batch < 1 || d.parallelism < 1 || d.memory_budget < 1 || d.batch_slowdown < 0.0 ||
          !(d.prefill_tokens_per_s > 0.0)) {
        throw ConfigError("invalid device profile '" + d.id + "'");
      }
      if (!known(d.initial_model)) {
        throw ConfigError("device '" + d.id + "' starts on unknown model '" + d.initial_model + "'");
      }
    }
    if (!edge.tier_model.empty() && !known(edge.tier_model)) {
      throw ConfigError("edge.tier_model '" + edge.tier_model + "' is not in the catalog");
    }
  }
};

// The reference cluster: a 70B-class cloud model with 20 batch slots and
// four Jetson-class devices running 7B-class models.
inline std::vector<EdgeModel> default_edge_models() {
  return {
      {{"qwen2.5-1.5b", 60.0, 0.60, 2.5, 2, -0.15, 0.0}, 0},
      {{"qwen2.5-7b", 22.0, 0.80, 2.5, 2, 0.0, 0.0}, 1},
      {{"llama3-8b", 20.0, 0.82, 2.5, 2, 0.0, 0.0}, 2},
  };
}

inline std::vector<DeviceProfile> default_devices(int count = 4) {
  std::vector<DeviceProfile> out;
  for (int i = 0; i < count; ++i) {
    DeviceProfile d;
    d.id = "jetson-" + std::to_string(i);
    d.initial_model = "qwen2.5-7b";
    out.push_back(d);
  }
  return out;
}

inline SimConfig default_config() {
  SimConfig c;
  c.edge.devices = default_devices();
  c.edge.models = default_edge_models();
  return c;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {
template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace detail

inline DeviceProfile device_from_json(const nlohmann::json& j) {
  DeviceProfile d;
  detail::read(j, "id", d.id);
  detail::read(j, "max_batch", d.max_batch);
  detail::read(j, "parallelism", d.parallelism);
  detail::read(j, "memory_budget_tokens", d.memory_budget);
  detail::read(j, "batch_slowdown", d.batch_slowdown);
  detail::read(j, "prefill_tokens_per_s", d.prefill_tokens_per_s);
  detail::read(j, "model", d.initial_model);
  return d;
}

inline nlohmann::json to_json(const DeviceProfile& d) {
  return {{"id", d.id},
          {"max_batch", d.max_batch},
          {"parallelism", d.parallelism},
          {"memory_budget_tokens", d.memory_budget},
          {"batch_slowdown", d.batch_slowdown},
          {"prefill_tokens_per_s", d.prefill_tokens_per_s},
          {"model", d.initial_model}};
}

// Missing keys keep their defaults. Unknown keys are ignored.
inline SimConfig config_from_json(const nlohmann::json& j) {
  SimConfig c = default_config();
  try {
    detail::read(j, "seed", c.seed);
    if (j.contains("policy")) c.policy = policy_from_string(j.at("policy").get<std::string>());
    detail::read(j, "drain", c.drain);
    detail::read(j, "routing_threshold", c.routing_threshold);

    if (j.contains("workload")) {
      const auto& w = j.at("workload");
      detail::read(w, "rpm", c.workload.rpm);
      detail::read(w, "duration_s", c.workload.duration);
      if (w.contains("arrival")) {
        const auto a = w.at("arrival").get<std::string>();
        if (a == "deterministic") {
          c.workload.arrival = Arrival::kDeterministic;
        } else if (a == "poisson") {
          c.workload.arrival = Arrival::kPoisson;
        } else {
          throw ConfigError("workload.arrival must be deterministic or poisson");
        }
      }
      if (w.contains("lengths")) {
        const auto& l = w.at("lengths");
        detail::read(l, "mean", c.workload.lengths.mean);
        detail::read(l, "sigma", c.workload.lengths.sigma);
        detail::read(l, "min", c.workload.lengths.min);
        detail::read(l, "max", c.workload.lengths.max);
      }
      if (w.contains("category_mix")) {
        c.workload.category_mix = w.at("category_mix").get<std::map<std::string, double>>();
      }
      if (w.contains("predictor")) {
        detail::read(w.at("predictor"), "enabled", c.workload.predictor.enabled);
        detail::read(w.at("predictor"), "sigma", c.workload.predictor.sigma);
      }
    }
    if (j.contains("cloud")) {
      const auto& cl = j.at("cloud");
      if (cl.contains("model")) c.cloud.model = mock_model_spec_from_json(cl.at("model"));
      detail::read(cl, "max_batch", c.cloud.max_batch);
      detail::read(cl, "batch_slowdown", c.cloud.batch_slowdown);
      detail::read(cl, "base_overhead_s", c.cloud.base_overhead);
    }
    if (j.contains("edge")) {
      const auto& e = j.at("edge");
      if (e.contains("models")) {
        c.edge.models.clear();
        for (const auto& m : e.at("models")) {
          EdgeModel em{mock_model_spec_from_json(m), 0};
          detail::read(m, "size_rank", em.size_rank);
          c.edge.models.push_back(em);
        }
      }
      if (e.contains("devices")) {
        c.edge.devices.clear();
        for (const auto& d : e.at("devices")) c.edge.devices.push_back(device_from_json(d));
      }
      detail::read(e, "switch_penalty_s", c.edge.switch_penalty);
      detail::read(e, "tier_model", c.edge.tier_model);
      detail::read(e, "prompt_overhead_tokens", c.edge.prompt_overhead_tokens);
    }
    if (j.contains("network")) c.net = network_model_from_json(j.at("network"));
    if (j.contains("queue")) {
      detail::read(j.at("queue"), "capacity", c.queue.capacity);
      detail::read(j.at("queue"), "bucket_edges", c.queue.bucket_edges);
    }
    if (j.contains("scheduler")) {
      const auto& s = j.at("scheduler");
      detail::read(s, "sketch_levels", c.scheduler.sketch_levels);
      detail::read(s, "profile_lengths", c.scheduler.profile_lengths);
      if (s.contains("lex_order")) c.scheduler.lex = lex_order_from_json(s.at("lex_order"));
    }
    if (j.contains("weights")) {
      detail::read(j.at("weights"), "alpha1", c.weights.alpha1);
      detail::read(j.at("weights"), "alpha2", c.weights.alpha2);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json to_json(const SimConfig& c) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : c.edge.models) {
    auto mj = to_json(m.spec);
    mj["size_rank"] = m.size_rank;
    models.push_back(mj);
  }
  nlohmann::json devices = nlohmann::json::array();
  for (const auto& d : c.edge.devices) devices.push_back(to_json(d));
  return {
      {"seed", c.seed},
      {"policy", to_string(c.policy)},
      {"drain", c.drain},
      {"routing_threshold", c.routing_threshold},
      {"workload",
       {{"rpm", c.workload.rpm},
        {"duration_s", c.workload.duration},
        {"arrival", c.workload.arrival == Arrival::kDeterministic ? "deterministic" : "poisson"},
        {"lengths",
         {{"mean", c.workload.lengths.mean},
          {"sigma", c.workload.lengths.sigma},
          {"min", c.workload.lengths.min},
          {"max", c.workload.lengths.max}}},
        {"category_mix", c.workload.category_mix},
        {"predictor",
         {{"enabled", c.workload.predictor.enabled}, {"sigma", c.workload.predictor.sigma}}}}},
      {"cloud",
       {{"model", to_json(c.cloud.model)},
        {"max_batch", c.cloud.max_batch},
        {"batch_slowdown", c.cloud.batch_slowdown},
        {"base_overhead_s", c.cloud.base_overhead}}},
      {"edge",
       {{"models", models},
        {"devices", devices},
        {"switch_penalty_s", c.edge.switch_penalty},
        {"tier_model", c.edge.tier_model},
        {"prompt_overhead_tokens", c.edge.prompt_overhead_tokens}}},
      {"network", to_json(c.net)},
      {"queue", {{"capacity", c.queue.capacity}, {"bucket_edges", c.queue.bucket_edges}}},
      {"scheduler",
       {{"sketch_levels", c.scheduler.sketch_levels},
        {"profile_lengths", c.scheduler.profile_lengths},
        {"lex_order", to_json(c.scheduler.lex)}}},
      {"weights", {{"alpha1", c.weights.alpha1}, {"alpha2", c.weights.alpha2}}},
  };
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace pice::sim
