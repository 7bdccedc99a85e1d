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

// Subcommands of the `pice` tool. They take explicit streams so they can be
// driven in-process as well as from main().

#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pice/pice.hpp"

namespace pice::cli {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string policy;
  std::string sweep_param;
  std::string sweep_values;
  std::string weights;
  std::string report_path;
  bool quiet = false;
};

inline std::vector<double> parse_number_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = std::string(trim(item));
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw InvalidInputError(std::string("bad number '") + t + "' in " + what);
    }
  }
  return out;
}

// Writes via a temporary file so a failed run never leaves a partial artifact.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    os << content;
    os.flush();
    if (!os) throw Error("cannot write '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- profile --------------------------------------------------------------

// Fits one curve per (model, device). Samples recorded on device "cloud"
// are the reference for cost coefficients of every other pair.
inline nlohmann::json profile_samples(const std::vector<MeasurementSample>& samples) {
  auto models = fit_latency_models(samples);
  nlohmann::json out;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [key, model] : models) {
    list.push_back({{"model_id", key.first}, {"device_id", key.second}, {"latency_model", to_json(model)}});
  }
  out["models"] = list;

  const LatencyModel* cloud = nullptr;
  std::string cloud_id;
  for (const auto& [key, model] : models) {
    if (key.second == "cloud") {
      cloud = &model;
      cloud_id = key.first;
      break;
    }
  }
  if (cloud) {
    std::set<double> probes;
    for (const auto& s : samples) {
      if (s.device_id == "cloud" && s.model_id == cloud_id) probes.insert(static_cast<double>(s.output_length));
    }
    const std::vector<double> probe_list(probes.begin(), probes.end());
    nlohmann::json costs = nlohmann::json::object();
    for (const auto& [key, model] : models) {
      if (key.second == "cloud") continue;
      costs[key.first + "@" + key.second] = estimate_cost_coefficient(*cloud, model, probe_list).value();
    }
    out["reference_model"] = cloud_id;
    out["cost_coefficients"] = costs;
  }
  return out;
}

inline int cmd_profile(const Options& o, std::ostream& out) {
  std::ifstream in(o.config);
  if (!in) throw InvalidInputError("cannot open samples '" + o.config + "'");
  auto result = profile_samples(read_measurements(in));
  const std::string text = result.dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text);
    if (!o.quiet) out << "wrote " << result["models"].size() << " latency models to " << o.out << "\n";
  }
  return 0;
}

// --- simulate / sweep -------------------------------------------------------

inline sim::SimConfig resolve_config(const Options& o) {
  auto cfg = sim::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.policy.empty()) cfg.policy = sim::policy_from_string(o.policy);
  cfg.validate();
  return cfg;
}

inline void print_summary(std::ostream& out, const sim::RunReport& r) {
  out << "policy " << r.policy << "  seed " << r.seed << "\n";
  out << "  completed " << r.counts.completed << " / arrived " << r.counts.arrived << "  (in flight "
      << r.counts.in_flight << ", rejected " << r.counts.rejected << ", fallbacks " << r.counts.fallbacks
      << ")\n";
  if (r.metrics) {
    const auto& m = *r.metrics;
    out << std::fixed << std::setprecision(3);
    out << "  throughput " << m.throughput << " q/min  mean latency " << m.latency << " s  error "
        << m.error << "\n";
    out << "  cloud tokens " << r.server_tokens << "  edge tokens " << r.edge_tokens << "\n";
    out.unsetf(std::ios::floatfield);
  } else {
    out << "  no query completed inside the window\n";
  }
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
  const auto cfg = resolve_config(o);
  const auto report = sim::run(cfg);
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("pice-out") : std::filesystem::path(o.out);
  write_file(dir / "report.json", to_json(report).dump(2) + "\n");
  std::ostringstream csv;
  sim::write_query_csv(csv, report);
  write_file(dir / "queries.csv", csv.str());
  if (!o.quiet) {
    print_summary(out, report);
    out << "  wrote " << (dir / "report.json").string() << " and " << (dir / "queries.csv").string() << "\n";
  }
  return 0;
}

inline int cmd_sweep(const Options& o, std::ostream& out) {
  const auto cfg = resolve_config(o);
  if (o.sweep_param.empty()) throw InvalidInputError("sweep needs --sweep-param");
  const auto values = parse_number_list(o.sweep_values, "--sweep-values");
  const auto reports = sim::run_sweep(cfg, o.sweep_param, values);

  nlohmann::json runs = nlohmann::json::array();
  std::vector<std::pair<double, MetricVector>> scored;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    runs.push_back({{"value", values[i]},
                    {"metrics", r.metrics ? to_json(*r.metrics) : nlohmann::json(nullptr)},
                    {"counts", to_json(r.counts)},
                    {"event_digest", r.event_digest}});
    if (r.metrics) scored.emplace_back(values[i], *r.metrics);
  }
  nlohmann::json result = {{"parameter", o.sweep_param},
                           {"policy", to_string(cfg.policy)},
                           {"seed", cfg.seed},
                           {"runs", runs}};
  if (!scored.empty()) {
    result["best_value"] = lex_optimize<double>(scored, cfg.scheduler.lex);
  }
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("pice-out") : std::filesystem::path(o.out);
  write_file(dir / "sweep.json", result.dump(2) + "\n");
  if (!o.quiet) {
    out << o.sweep_param << " sweep, policy " << to_string(cfg.policy) << "\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      out << "  " << values[i] << ": ";
      if (reports[i].metrics) {
        out << "throughput " << reports[i].metrics->throughput << " q/min, latency "
            << reports[i].metrics->latency << " s\n";
      } else {
        out << "no completions\n";
      }
    }
    if (result.contains("best_value")) out << "  best " << result["best_value"] << "\n";
  }
  return 0;
}

// --- score ------------------------------------------------------------------

inline ConfidenceWeights parse_confidence_weights(const std::string& s) {
  ConfidenceWeights w;
  if (s.empty()) return w;
  auto v = parse_number_list(s, "--weights");
  if (v.size() != 2) throw InvalidInputError("--weights expects a1,a2");
  w.alpha1 = v[0];
  w.alpha2 = v[1];
  w.validate();
  return w;
}

// {"sketch": str, "candidates": [{"model_id", "text", "logprobs": [..] | null}]}
inline std::pair<std::string, std::vector<CandidateResponse>> read_candidates(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
    std::vector<CandidateResponse> out;
    for (const auto& c : j.at("candidates")) {
      CandidateResponse r;
      r.text = c.at("text").get<std::string>();
      r.model_id = c.value("model_id", std::string("candidate-") + std::to_string(out.size()));
      r.job_id = j.value("job_id", std::string("cli"));
      if (c.contains("logprobs") && !c.at("logprobs").is_null()) {
        r.token_logprobs = c.at("logprobs").get<std::vector<double>>();
      } else {
        r.has_logprobs = false;
      }
      out.push_back(std::move(r));
    }
    return {j.value("sketch", std::string()), std::move(out)};
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("malformed candidates file: " + std::string(e.what()));
  }
}

inline int cmd_score(const Options& o, std::ostream& out) {
  auto [sketch, candidates] = read_candidates(o.config);
  const auto w = parse_confidence_weights(o.weights);
  const auto report = score_candidates(candidates, sketch, w);
  if (!o.out.empty()) write_file(o.out, to_json(report).dump(2) + "\n");
  out << std::fixed << std::setprecision(6);
  out << "idx  model_id  geo_prob  norm  rouge  confidence\n";
  for (std::size_t i = 0; i < report.parts.size(); ++i) {
    const auto& p = report.parts[i];
    out << i << "  " << report.model_ids[i] << "  " << p.geo_prob << "  " << p.norm << "  " << p.rouge
        << "  " << p.confidence << (p.degraded ? "  (no logprobs)" : "") << "\n";
  }
  out << "winner " << report.winner << " " << report.model_ids[report.winner] << "\n";
  out.unsetf(std::ios::floatfield);
  return 0;
}

// --- label-prefs --------------------------------------------------------------

inline PreferenceWeights parse_preference_weights(const std::string& s) {
  PreferenceWeights w;
  if (s.empty()) return w;
  auto v = parse_number_list(s, "--weights");
  if (v.size() != 2) throw InvalidInputError("--weights expects b1,b2");
  w.beta1 = v[0];
  w.beta2 = v[1];
  w.validate();
  return w;
}

inline int cmd_label_prefs(const Options& o, std::ostream& out) {
  const auto w = parse_preference_weights(o.weights);
  std::ifstream in(o.config);
  if (!in) throw InvalidInputError("cannot open pairs '" + o.config + "'");
  std::vector<PreferenceTriplet> triplets;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      triplets.push_back(label_pair(sketch_pair_from_json(nlohmann::json::parse(line)), w));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInputError("pairs line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::ostringstream os;
  write_triplets(os, triplets);
  if (o.out.empty()) {
    out << os.str();
  } else {
    write_file(o.out, os.str());
    if (!o.quiet) out << "wrote " << triplets.size() << " preference triplets to " << o.out << "\n";
  }
  return 0;
}

// --- report -------------------------------------------------------------------

// Summarizes a report.json written by simulate.
inline int cmd_report(const Options& o, std::ostream& out) {
  nlohmann::json r;
  try {
    r = nlohmann::json::parse(read_file(o.report_path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("report is not valid JSON: " + std::string(e.what()));
  }
  try {
    out << "policy " << r.at("policy").get<std::string>() << "  seed " << r.at("seed") << "  window "
        << r.at("window_s") << " s\n";
    const auto& c = r.at("counts");
    out << "  arrived " << c.at("arrived") << "  completed " << c.at("completed") << "  in flight "
        << c.at("in_flight") << "  rejected " << c.at("rejected") << "\n";
    out << "  progressive " << c.at("progressive") << "  full_cloud " << c.at("full_cloud")
        << "  edge_full " << c.at("edge_full") << "  fallbacks " << c.at("fallbacks") << "\n";
    if (!r.at("metrics").is_null()) {
      const auto& m = r.at("metrics");
      out << "  throughput " << m.at("throughput_qpm") << " q/min  latency " << m.at("latency_s")
          << " s  error " << m.at("error") << "\n";
    }
    std::map<std::string, double> stage_sum;
    std::size_t done = 0;
    for (const auto& q : r.at("queries")) {
      if (!q.at("completed").get<bool>()) continue;
      ++done;
      for (const auto& [k, v] : q.at("stages").items()) stage_sum[k] += v.get<double>();
    }
    if (done) {
      out << "  mean stage latency:";
      for (const auto& [k, v] : stage_sum) out << " " << k << "=" << v / static_cast<double>(done);
      out << "\n";
    }
    out << "  event digest " << r.at("event_digest").get<std::string>() << "\n";
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("report is missing fields: " + std::string(e.what()));
  }
  return 0;
}

// --- entry point ----------------------------------------------------------------

inline std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("PICE_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("PICE_SEED is not an unsigned integer: ") + s);
  }
}

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Progressive cloud-edge inference scheduler and simulator", "pice"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed_flag = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", o.config, "input file")->check(CLI::ExistingFile);
    if (needs_config) opt->required();
    sub->add_option("--out", o.out, "output path");
    sub->add_flag("--quiet", o.quiet, "suppress summaries");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_flag, "seed override (default: PICE_SEED, then the config)");
    sub->add_option("--policy", o.policy, "pice, cloud_only, edge_only or routing");
  };

  auto* profile = app.add_subcommand("profile", "fit latency models from measurement samples (JSONL)");
  add_common(profile, true);
  auto* simulate = app.add_subcommand("simulate", "run one simulation and write report.json + queries.csv");
  add_common(simulate, true);
  add_sim(simulate);
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write sweep.json");
  add_common(sweep, true);
  add_sim(sweep);
  sweep->add_option("--sweep-param", o.sweep_param, "rpm, queue_capacity, bandwidth or sketch_level_count")
      ->required();
  sweep->add_option("--sweep-values", o.sweep_values, "comma-separated values")->required();
  auto* score = app.add_subcommand("score", "score candidate answers and print the winner");
  add_common(score, true);
  score->add_option("--weights", o.weights, "a1,a2 confidence weights");
  auto* label = app.add_subcommand("label-prefs", "label sketch pairs into preference triplets (JSONL)");
  add_common(label, true);
  label->add_option("--weights", o.weights, "b1,b2 preference weights");
  auto* report = app.add_subcommand("report", "summarize a report.json");
  report->add_option("report", o.report_path, "report.json from simulate")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_flag("--quiet", o.quiet, "suppress summaries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "pice: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    if (app.get_subcommands().empty()) err << app.help();
    return 2;
  }

  try {
    bool seed_given = false;
    for (auto* sub : {simulate, sweep}) {
      if (sub->parsed() && sub->count("--seed") > 0) seed_given = true;
    }
    o.seed = seed_given ? std::optional<std::uint64_t>(seed_flag) : env_seed();

    if (profile->parsed()) return cmd_profile(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (score->parsed()) return cmd_score(o, out);
    if (label->parsed()) return cmd_label_prefs(o, out);
    if (report->parsed()) return cmd_report(o, out);
  } catch (const std::exception& e) {
    err << "pice: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace pice::cli
