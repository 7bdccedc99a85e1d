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

// What a simulation run produces: per-query records, logs from each
// component, headline metrics and an event-order digest.

#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pice/cloud_scheduler.hpp"
#include "pice/dispatcher.hpp"
#include "pice/ensemble.hpp"

namespace pice::sim {

struct StageTimes {
  Seconds cloud_wait = 0.0;
  Seconds cloud_gen = 0.0;
  Seconds network = 0.0;
  Seconds edge_queue = 0.0;
  Seconds edge_exec = 0.0;

  Seconds total() const { return cloud_wait + cloud_gen + network + edge_queue + edge_exec; }
};

struct QueryRecord {
  std::string query_id;
  std::string category;
  Seconds arrival = 0.0;
  Tokens true_len = 0;
  Tokens expected_len = 0;
  std::string mode = "pending";  // progressive, full_cloud or edge_full
  int level_index = 0;
  Tokens target_sketch_len = 0;
  Tokens sketch_len = 0;
  std::string device;
  std::string edge_model;
  std::string winner_model;
  int groups = 0;
  bool fell_back = false;
  int attempts = 0;
  StageTimes stages;
  bool completed = false;
  bool rejected = false;
  Seconds completion = 0.0;
  std::optional<double> rouge;  // winner vs reference answer
  Tokens cloud_tokens = 0;
  Tokens edge_tokens = 0;

  Seconds e2e() const { return completion - arrival; }
};

struct RunCounts {
  std::size_t arrived = 0;
  std::size_t completed = 0;  // inside the measurement window
  std::size_t in_flight = 0;
  std::size_t rejected = 0;
  std::size_t progressive = 0;
  std::size_t full_cloud = 0;
  std::size_t edge_full = 0;
  std::size_t fallbacks = 0;
};

struct RunReport {
  std::uint64_t seed = 0;
  std::string policy;
  Seconds window = 0.0;
  std::optional<MetricVector> metrics;  // empty when nothing completed
  RunCounts counts;
  double mean_sketch_tokens = 0.0;
  Tokens server_tokens = 0;
  Tokens edge_tokens = 0;
  nlohmann::json profile;
  std::vector<nlohmann::json> decisions;
  std::vector<DispatchRecord> dispatches;
  std::vector<ScoringReport> ensembles;
  std::vector<QueryRecord> queries;
  std::string event_digest;
  std::size_t events = 0;
};

inline nlohmann::json to_json(const StageTimes& s) {
  return {{"cloud_wait_s", s.cloud_wait},
          {"cloud_gen_s", s.cloud_gen},
          {"network_s", s.network},
          {"edge_queue_s", s.edge_queue},
          {"edge_exec_s", s.edge_exec}};
}

inline nlohmann::json to_json(const QueryRecord& q) {
  nlohmann::json j = {{"query_id", q.query_id},
                      {"category", q.category},
                      {"arrival_s", q.arrival},
                      {"true_len", q.true_len},
                      {"l_i", q.expected_len},
                      {"mode", q.mode},
                      {"level_index", q.level_index},
                      {"target_sketch_len", q.target_sketch_len},
                      {"sketch_len", q.sketch_len},
                      {"device", q.device},
                      {"edge_model", q.edge_model},
                      {"winner_model", q.winner_model},
                      {"groups", q.groups},
                      {"fell_back", q.fell_back},
                      {"attempts", q.attempts},
                      {"stages", to_json(q.stages)},
                      {"completed", q.completed},
                      {"rejected", q.rejected},
                      {"cloud_tokens", q.cloud_tokens},
                      {"edge_tokens", q.edge_tokens}};
  j["e2e_latency_s"] = q.completed ? nlohmann::json(q.e2e()) : nlohmann::json(nullptr);
  j["rouge_vs_reference"] = q.rouge ? nlohmann::json(*q.rouge) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const RunCounts& c) {
  return {{"arrived", c.arrived},     {"completed", c.completed},     {"in_flight", c.in_flight},
          {"rejected", c.rejected},   {"progressive", c.progressive}, {"full_cloud", c.full_cloud},
          {"edge_full", c.edge_full}, {"fallbacks", c.fallbacks}};
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json decisions = r.decisions;
  nlohmann::json dispatches = nlohmann::json::array();
  for (const auto& d : r.dispatches) dispatches.push_back(to_json(d));
  nlohmann::json ensembles = nlohmann::json::array();
  for (const auto& e : r.ensembles) ensembles.push_back(to_json(e));
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& q : r.queries) queries.push_back(to_json(q));
  return {{"seed", r.seed},
          {"policy", r.policy},
          {"window_s", r.window},
          {"metrics", r.metrics ? to_json(*r.metrics) : nlohmann::json(nullptr)},
          {"counts", to_json(r.counts)},
          {"mean_sketch_tokens", r.mean_sketch_tokens},
          {"server_tokens", r.server_tokens},
          {"edge_tokens", r.edge_tokens},
          {"profile", r.profile},
          {"decision_log", decisions},
          {"dispatch_log", dispatches},
          {"ensemble_log", ensembles},
          {"queries", queries},
          {"event_digest", r.event_digest},
          {"events", r.events}};
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

inline std::string format_seconds(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_query_csv(std::ostream& os, const RunReport& r) {
  os << "query_id,arrival,mode,sketch_len,l_i,device,e2e_latency_s,winner_model\n";
  for (const auto& q : r.queries) {
    os << csv_field(q.query_id) << ',' << format_seconds(q.arrival) << ',' << q.mode << ','
       << q.sketch_len << ',' << q.expected_len << ',' << csv_field(q.device) << ','
       << (q.completed ? format_seconds(q.e2e()) : "") << ',' << csv_field(q.winner_model) << '\n';
  }
}

}  // namespace pice::sim
