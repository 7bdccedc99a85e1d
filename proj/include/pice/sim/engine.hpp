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

// Discrete-event engine. Queries arrive, the cloud either answers them in
// full or produces a sketch, sketches travel to the edge queue, devices pull
// batches, expand them in parallel and pick a winner per query. Events are
// ordered by (time, sequence number) so runs are reproducible.

#pragma once

#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "pice/backends.hpp"
#include "pice/cloud_scheduler.hpp"
#include "pice/cost_model.hpp"
#include "pice/dispatcher.hpp"
#include "pice/edge_runtime.hpp"
#include "pice/ensemble.hpp"
#include "pice/profiler.hpp"
#include "pice/random.hpp"
#include "pice/sim/config.hpp"
#include "pice/sim/ps_server.hpp"
#include "pice/sim/report.hpp"

namespace pice::sim {

enum class Route { kCloud, kEdge };

inline Route routing_baseline(Tokens predicted_len, Tokens threshold) {
  return predicted_len < threshold ? Route::kEdge : Route::kCloud;
}

inline Route routing_baseline(const Query& q, Tokens threshold, const PredictorConfig& predictor) {
  return routing_baseline(predict_answer_length(q, predictor), threshold);
}

// Offline profile of the configured cluster. The cloud curve is measured
// with every batch slot busy; edge curves with a single stream.
struct ClusterProfile {
  LatencyModel f;
  std::map<std::string, double> cost;  // per edge model
};

inline ClusterProfile profile_cluster(const SimConfig& cfg) {
  const auto& cl = cfg.cloud;
  const double loaded_rate =
      cl.model.tokens_per_second / (1.0 + cl.batch_slowdown * static_cast<double>(cl.max_batch - 1));
  std::vector<MeasurementSample> cloud;
  for (double l : cfg.scheduler.profile_lengths) {
    cloud.push_back({cl.model.model_id, "cloud", static_cast<Tokens>(l), cl.base_overhead + l / loaded_rate});
  }
  ClusterProfile p{fit_latency_model(cloud), {}};
  for (const auto& m : cfg.edge.models) {
    std::vector<MeasurementSample> edge;
    for (double l : cfg.scheduler.profile_lengths) {
      edge.push_back({m.spec.model_id, "edge", static_cast<Tokens>(l), l / m.spec.tokens_per_second});
    }
    p.cost[m.spec.model_id] =
        estimate_cost_coefficient(p.f, fit_latency_model(edge), cfg.scheduler.profile_lengths).value();
  }
  return p;
}

inline std::vector<Query> make_workload(const SimConfig& cfg) {
  const auto& w = cfg.workload;
  Rng rng(mix_seed({cfg.seed, 0x776f726b6c6f6164ull}));
  double total_weight = 0.0;
  for (const auto& [k, v] : w.category_mix) total_weight += v;
  const double mu = std::log(w.lengths.mean) - 0.5 * w.lengths.sigma * w.lengths.sigma;
  const Seconds gap = 60.0 / w.rpm;

  std::vector<Query> out;
  Seconds t = 0.0;
  for (std::size_t i = 0; t < w.duration; ++i) {
    Query q;
    char id[32];
    std::snprintf(id, sizeof id, "q%05zu", i);
    q.id = id;
    q.arrival_time = t;
    double pick = rng.uniform() * total_weight;
    for (const auto& [k, v] : w.category_mix) {
      q.category = k;
      if ((pick -= v) < 0.0) break;
    }
    const double len = std::exp(mu + w.lengths.sigma * rng.normal());
    q.true_answer_length = std::clamp<Tokens>(static_cast<Tokens>(std::llround(len)), w.lengths.min,
                                              w.lengths.max);
    q.text = "Explain " + q.category + " topic " + std::to_string(i) + " in detail";
    out.push_back(std::move(q));
    t += w.arrival == Arrival::kDeterministic ? gap : rng.exponential(gap);
  }
  return out;
}

class Engine {
 public:
  explicit Engine(SimConfig cfg, GenerationBackend* backend = nullptr)
      : cfg_(std::move(cfg)), profile_(init_profile()),
        queue_(cfg_.queue.bucket_edges,
               cfg_.policy == Policy::kPice ? cfg_.queue.capacity
                                            : std::numeric_limits<std::size_t>::max()),
        cloud_(cfg_.cloud.model.tokens_per_second, cfg_.cloud.batch_slowdown) {
    if (backend) {
      backend_ = backend;
    } else {
      auto mock = std::make_unique<MockBackend>();
      mock->add(cfg_.cloud.model);
      for (const auto& m : cfg_.edge.models) mock->add(m.spec);
      owned_backend_ = std::move(mock);
      backend_ = owned_backend_.get();
    }
    catalog_.switch_penalty = cfg_.edge.switch_penalty;
    for (const auto& m : cfg_.edge.models) {
      catalog_.models.push_back({m.spec.model_id, m.size_rank,
                                 CostCoefficient(profile_.cost.at(m.spec.model_id)), m.spec.quality});
      specs_[m.spec.model_id] = m.spec;
    }
    for (const auto& d : cfg_.edge.devices) {
      Device dev;
      dev.profile = d;
      dev.model = d.initial_model;
      dev.server = PsServer(specs_.at(d.initial_model).tokens_per_second, d.batch_slowdown);
      devices_.push_back(std::move(dev));
    }
    if (!cfg_.edge.models.empty()) {
      tier_model_ = cfg_.edge.tier_model.empty()
                        ? (devices_.empty() ? cfg_.edge.models.front().spec.model_id
                                            : devices_.front().model)
                        : cfg_.edge.tier_model;
    }
  }

  RunReport run() {
    queries_ = make_workload(cfg_);
    records_.resize(queries_.size());
    for (std::size_t i = 0; i < queries_.size(); ++i) {
      auto& r = records_[i];
      const auto& q = queries_[i];
      r.query_id = q.id;
      r.category = q.category;
      r.arrival = q.arrival_time;
      r.true_len = q.true_answer_length;
      PredictorConfig pred = cfg_.workload.predictor;
      pred.seed = cfg_.seed;
      r.expected_len = predict_answer_length(q, pred);
      seeds_.push_back(mix_seed({cfg_.seed, stable_hash(q.id)}));
      push(q.arrival_time, Ev::kArrival, i);
    }

    while (!events_.empty()) {
      Event e = events_.top();
      if (!cfg_.drain && e.t > cfg_.workload.duration) break;
      events_.pop();
      now_ = e.t;
      record_event(e);
      handle(e);
    }
    return build_report();
  }

  // Accessors used for runtime snapshots.
  std::vector<Tokens> queue_token_load() const { return queue_.queue_token_load(); }
  int busy_device_count() const {
    int n = 0;
    for (const auto& d : devices_) n += d.busy ? 1 : 0;
    return n;
  }
  Seconds observed_rtt() const { return cfg_.net.base_rtt; }
  Seconds now() const { return now_; }

 private:
  enum class Ev : int { kArrival, kCloudTick, kCloudDone, kEdgeArrive, kEdgeStart, kEdgeTick };

  struct Event {
    Seconds t;
    std::uint64_t seq;
    Ev type;
    std::size_t a;
    std::uint64_t b;
  };
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.t != y.t ? x.t > y.t : x.seq > y.seq;
    }
  };

  struct CloudTask {
    std::size_t q;
    bool full;  // a full answer rather than a sketch
  };
  struct CloudStream {
    bool full = false;
    std::string text;
    Tokens tokens = 0;
  };

  struct ActiveJob {
    std::size_t q = 0;
    std::string sketch;
    std::vector<CandidateResponse> candidates;
    std::vector<Tokens> streams;
    std::size_t streams_left = 0;
  };
  struct Device {
    DeviceProfile profile;
    std::string model;
    PsServer server;
    bool busy = false;
    std::vector<ActiveJob> jobs;
    std::size_t jobs_left = 0;
    std::uint64_t version = 0;
  };

  ClusterProfile init_profile() {
    cfg_.validate();
    return profile_cluster(cfg_);
  }

  void push(Seconds t, Ev type, std::size_t a, std::uint64_t b = 0) {
    events_.push({t, next_seq_++, type, a, b});
  }

  void record_event(const Event& e) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.9f|%d|%zu|%llu;", e.t, static_cast<int>(e.type), e.a,
                  static_cast<unsigned long long>(e.b));
    digest_ = stable_hash(buf, digest_);
    ++event_count_;
  }

  void advance_stage(std::size_t q, Seconds StageTimes::*stage) {
    auto& r = records_[q];
    r.stages.*stage += now_ - marks_[q];
    marks_[q] = now_;
  }

  void handle(const Event& e) {
    switch (e.type) {
      case Ev::kArrival: on_arrival(e.a); break;
      case Ev::kCloudTick:
        if (e.b == cloud_version_) on_cloud_tick();
        break;
      case Ev::kCloudDone: on_cloud_done(e.a); break;
      case Ev::kEdgeArrive: on_edge_arrive(e.a); break;
      case Ev::kEdgeStart: on_edge_start(e.a); break;
      case Ev::kEdgeTick:
        if (e.b == devices_[e.a].version) on_edge_tick(e.a);
        break;
    }
  }

  // --- arrivals -----------------------------------------------------------

  void on_arrival(std::size_t q) {
    marks_[q] = now_;
    ++arrived_;
    switch (cfg_.policy) {
      case Policy::kCloudOnly:
        cloud_wait_.push_back({q, true});
        admit_cloud();
        break;
      case Policy::kPice:
        cloud_wait_.push_back({q, false});
        admit_cloud();
        break;
      case Policy::kEdgeOnly:
        enqueue_edge_full(q);
        break;
      case Policy::kRouting:
        if (routing_baseline(records_[q].expected_len, cfg_.routing_threshold) == Route::kEdge) {
          enqueue_edge_full(q);
        } else {
          cloud_wait_.push_back({q, true});
          admit_cloud();
        }
        break;
    }
  }

  // --- cloud --------------------------------------------------------------

  void admit_cloud() {
    bool changed = false;
    while (cloud_.active() < static_cast<std::size_t>(cfg_.cloud.max_batch) && !cloud_wait_.empty()) {
      CloudTask task = cloud_wait_.front();
      cloud_wait_.pop_front();
      const std::size_t q = task.q;
      auto& rec = records_[q];
      advance_stage(q, &StageTimes::cloud_wait);

      GenerationRequest req;
      req.prompt = queries_[q].text;
      req.seed = seeds_[q];
      req.model_id = cfg_.cloud.model.model_id;
      req.role = Role::kFullAnswer;
      req.max_tokens = rec.true_len;
      if (!task.full) {
        const auto& tier = catalog_.at(tier_model_);
        const EdgePool pool{static_cast<int>(devices_.size()), devices_.front().profile.parallelism};
        auto d = choose_sketch_level(rec.expected_len, cfg_.scheduler.sketch_levels, snapshot(*this),
                                     profile_.f, tier.cost, pool, cfg_.net,
                                     catalog_.capability_rank(tier_model_));
        decisions_.push_back(to_json(d, rec.query_id));
        decisions_.back()["time_s"] = now_;
        rec.level_index = d.level_index;
        rec.target_sketch_len = d.target_sketch_len;
        if (d.mode == Mode::kProgressive) {
          req.role = Role::kSketch;
          req.max_tokens = d.target_sketch_len;
        }
      }
      const bool full = req.role == Role::kFullAnswer;
      rec.mode = full ? "full_cloud" : "progressive";

      std::vector<GenerationResult> results;
      try {
        results = backend_->generate(req);
      } catch (const BackendError&) {
        results.clear();
      }
      if (results.empty()) {
        rec.rejected = true;
        ++rejected_;
        continue;
      }
      for (const auto& r : results) {
        server_tokens_ += r.generated_tokens;
        rec.cloud_tokens += r.generated_tokens;
      }
      CloudStream s{full, results.front().text, results.front().generated_tokens};
      cloud_.add(now_, q, s.tokens);
      cloud_streams_[q] = std::move(s);
      changed = true;
    }
    if (changed) reschedule_cloud();
  }

  void reschedule_cloud() {
    ++cloud_version_;
    const Seconds t = cloud_.next_finish_time();
    if (std::isfinite(t)) push(t, Ev::kCloudTick, 0, cloud_version_);
  }

  void on_cloud_tick() {
    for (auto id : cloud_.pop_finished(now_)) {
      push(now_ + cfg_.cloud.base_overhead, Ev::kCloudDone, static_cast<std::size_t>(id));
    }
    reschedule_cloud();
    admit_cloud();
  }

  void on_cloud_done(std::size_t q) {
    advance_stage(q, &StageTimes::cloud_gen);
    auto node = cloud_streams_.extract(q);
    CloudStream& s = node.mapped();
    if (s.full) {
      complete(q, s.text, cfg_.cloud.model.model_id);
      return;
    }
    auto& rec = records_[q];
    rec.sketch_len = s.tokens;
    sketches_[q] = std::move(s.text);
    push(now_ + network_delay(cfg_.net, static_cast<double>(rec.sketch_len)), Ev::kEdgeArrive, q);
  }

  void fall_back_to_cloud(std::size_t q) {
    records_[q].fell_back = true;
    ++fallbacks_;
    cloud_wait_.push_front({q, true});
    admit_cloud();
  }

  // --- edge ---------------------------------------------------------------

  void on_edge_arrive(std::size_t q) {
    advance_stage(q, &StageTimes::network);
    auto& rec = records_[q];
    Job job;
    job.query_id = rec.query_id;
    job.query_text = queries_[q].text;
    job.sketch_text = sketches_.at(q);
    job.sentences = split_sentences(job.sketch_text);
    job.expected_len = rec.expected_len;
    job.sketch_len = std::min(rec.sketch_len, rec.expected_len);
    job.enqueue_time = now_;
    job.deadline_budget = profile_.f.eval(static_cast<double>(rec.expected_len));
    job.arrival_time = rec.arrival;
    job.seed = seeds_[q];
    if (job.sentences.empty()) {
      fall_back_to_cloud(q);
      return;
    }
    enqueue_job(q, std::move(job));
  }

  void enqueue_edge_full(std::size_t q) {
    auto& rec = records_[q];
    rec.mode = "edge_full";
    Job job;
    job.query_id = rec.query_id;
    job.query_text = queries_[q].text;
    job.expected_len = rec.expected_len;
    job.enqueue_time = now_;
    job.deadline_budget = profile_.f.eval(static_cast<double>(rec.expected_len));
    job.arrival_time = rec.arrival;
    job.seed = seeds_[q];
    job.full_answer = true;
    enqueue_job(q, std::move(job));
  }

  void enqueue_job(std::size_t q, Job job) {
    job_index_[job.query_id] = q;
    try {
      queue_.enqueue(std::move(job));
    } catch (const BackpressureError&) {
      fall_back_to_cloud(q);
      return;
    }
    try_dispatch();
  }

  void try_dispatch() {
    for (std::size_t d = 0; d < devices_.size(); ++d) {
      if (!devices_[d].busy && !queue_.empty()) start_batch(d);
    }
  }

  void start_batch(std::size_t d) {
    auto& dev = devices_[d];
    int bucket = -1;
    auto batch = queue_.pull_batch(dev.profile, &bucket);
    if (batch.empty()) return;
    DispatchRecord rec{now_, dev.profile.id, bucket, {}};
    for (const auto& j : batch) rec.job_ids.push_back(j.query_id);
    dispatches_.push_back(rec);

    std::string model = dev.model;
    if (!batch.front().full_answer) {
      model = select_model(batch.front(), dev.model, catalog_, profile_.f, queue_.size(),
                           queue_.capacity());
    }
    Seconds setup = 0.0;
    if (model != dev.model) {
      setup += catalog_.switch_penalty;
      dev.model = model;
      dev.server.set_rate(specs_.at(model).tokens_per_second);
    }

    dev.jobs.clear();
    std::vector<std::pair<std::size_t, Job>> retries;
    for (auto& job : batch) {
      const std::size_t q = job_index_.at(job.query_id);
      auto& qr = records_[q];
      advance_stage(q, &StageTimes::edge_queue);
      qr.device = dev.profile.id;
      qr.edge_model = model;
      ActiveJob active;
      active.q = q;
      active.sketch = job.sketch_text;
      Tokens prompt = cfg_.edge.prompt_overhead_tokens;
      try {
        if (job.full_answer) {
          GenerationRequest req;
          req.prompt = job.query_text;
          req.max_tokens = qr.true_len;
          req.role = Role::kFullAnswer;
          req.seed = job.seed;
          req.model_id = model;
          req.attempt = job.attempts;
          for (auto& r : backend_->generate(req)) {
            active.streams.push_back(r.generated_tokens);
            CandidateResponse c{r.text, r.token_logprobs, model, job.query_id, r.logprobs_available};
            active.candidates.push_back(std::move(c));
          }
          qr.groups = 1;
        } else {
          const CostCoefficient c = catalog_.at(model).cost;
          MergeParams mp;
          mp.latency_budget = job.arrival_time + job.deadline_budget - now_;
          mp.memory_budget = dev.profile.memory_budget;
          mp.f = &profile_.f;
          mp.c = c;
          mp.p_max = dev.profile.parallelism;
          mp.expansion_factor = specs_.at(model).expansion_factor;
          mp.prompt_overhead_tokens = cfg_.edge.prompt_overhead_tokens;
          mp.sketch_tokens = job.sketch_len;
          const auto groups = merge_groups(job.sentences, mp);
          auto out = expand_job(job, groups, *backend_, model, {&profile_.f, c, 0.0});
          for (const auto& per_group : out.stream_tokens) {
            for (Tokens t : per_group) active.streams.push_back(t);
          }
          active.candidates = std::move(out.candidates);
          prompt = prompt_tokens(groups, mp);
          qr.groups = static_cast<int>(groups.size());
        }
      } catch (const BackendError&) {
        ++job.attempts;
        qr.attempts = job.attempts;
        retries.emplace_back(q, std::move(job));
        continue;
      }
      for (Tokens t : active.streams) {
        edge_tokens_ += t;
        qr.edge_tokens += t;
      }
      active.streams_left = active.streams.size();
      setup += static_cast<double>(prompt) / dev.profile.prefill_tokens_per_s;
      dev.jobs.push_back(std::move(active));
    }
    if (!dev.jobs.empty()) {
      dev.busy = true;
      dev.jobs_left = dev.jobs.size();
      push(now_ + setup, Ev::kEdgeStart, d);
    }
    // A failed job gets one more pass through the queue, then the cloud.
    for (auto& [q, job] : retries) {
      if (job.attempts < 2) {
        job.enqueue_time = now_;
        enqueue_job(q, std::move(job));
      } else {
        fall_back_to_cloud(q);
      }
    }
  }

  static std::uint64_t stream_id(std::size_t job, std::size_t stream) {
    return (static_cast<std::uint64_t>(job) << 32) | static_cast<std::uint64_t>(stream);
  }

  void on_edge_start(std::size_t d) {
    auto& dev = devices_[d];
    for (std::size_t j = 0; j < dev.jobs.size(); ++j) {
      for (std::size_t s = 0; s < dev.jobs[j].streams.size(); ++s) {
        dev.server.add(now_, stream_id(j, s), dev.jobs[j].streams[s]);
      }
    }
    reschedule_device(d);
  }

  void reschedule_device(std::size_t d) {
    auto& dev = devices_[d];
    ++dev.version;
    const Seconds t = dev.server.next_finish_time();
    if (std::isfinite(t)) push(t, Ev::kEdgeTick, d, dev.version);
  }

  void on_edge_tick(std::size_t d) {
    auto& dev = devices_[d];
    for (auto id : dev.server.pop_finished(now_)) {
      auto& job = dev.jobs[static_cast<std::size_t>(id >> 32)];
      if (--job.streams_left == 0) {
        finish_edge_job(job);
        --dev.jobs_left;
      }
    }
    if (dev.jobs_left == 0) {
      dev.busy = false;
      dev.jobs.clear();
      ++dev.version;
      try_dispatch();
    } else {
      reschedule_device(d);
    }
  }

  void finish_edge_job(ActiveJob& job) {
    advance_stage(job.q, &StageTimes::edge_exec);
    auto report = score_candidates(job.candidates, job.sketch, cfg_.weights);
    const auto& winner = job.candidates[report.winner];
    ensembles_.push_back(report);
    complete(job.q, winner.text, winner.model_id);
  }

  void complete(std::size_t q, const std::string& text, const std::string& model) {
    auto& rec = records_[q];
    rec.completed = true;
    rec.completion = now_;
    rec.winner_model = model;
    rec.rouge = rouge_l(mock::latent_text(seeds_[q], rec.true_len), text);
  }

  // --- report -------------------------------------------------------------

  RunReport build_report() {
    RunReport r;
    r.seed = cfg_.seed;
    r.policy = to_string(cfg_.policy);
    r.window = cfg_.workload.duration;
    if (cfg_.drain) {
      for (const auto& q : records_) {
        if (q.completed) r.window = std::max(r.window, q.completion);
      }
    }
    RunSummary summary;
    summary.window = r.window;
    summary.server_tokens = static_cast<double>(server_tokens_);
    summary.edge_tokens = static_cast<double>(edge_tokens_);
    double sketch_total = 0.0;
    for (std::size_t i = 0; i < arrived_; ++i) {
      const auto& q = records_[i];
      if (q.rejected) {
        ++r.counts.rejected;
      } else if (q.completed && q.completion <= r.window) {
        ++r.counts.completed;
        summary.completed.push_back({q.e2e(), q.rouge});
      }
      if (q.mode == "progressive") {
        ++r.counts.progressive;
        sketch_total += static_cast<double>(q.sketch_len);
      } else if (q.mode == "full_cloud") {
        ++r.counts.full_cloud;
      } else if (q.mode == "edge_full") {
        ++r.counts.edge_full;
      }
    }
    r.counts.arrived = arrived_;
    r.counts.in_flight = r.counts.arrived - r.counts.completed - r.counts.rejected;
    r.counts.fallbacks = fallbacks_;
    r.mean_sketch_tokens = r.counts.progressive ? sketch_total / static_cast<double>(r.counts.progressive) : 0.0;
    r.server_tokens = server_tokens_;
    r.edge_tokens = edge_tokens_;
    try {
      r.metrics = measure(summary);
    } catch (const UndefinedMetricsError&) {
      r.metrics.reset();
    }
    r.profile["latency_model"] = to_json(profile_.f);
    r.profile["cost_coefficients"] = profile_.cost;
    r.profile["tier_model"] = tier_model_;
    r.decisions = std::move(decisions_);
    r.dispatches = std::move(dispatches_);
    r.ensembles = std::move(ensembles_);
    r.queries.assign(records_.begin(), records_.begin() + static_cast<std::ptrdiff_t>(arrived_));
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest_));
    r.event_digest = buf;
    r.events = event_count_;
    return r;
  }

  SimConfig cfg_;
  ClusterProfile profile_;
  BucketedQueue queue_;
  PsServer cloud_;
  std::unique_ptr<GenerationBackend> owned_backend_;
  GenerationBackend* backend_ = nullptr;
  SlmCatalog catalog_;
  std::map<std::string, MockModelSpec> specs_;
  std::vector<Device> devices_;
  std::string tier_model_;

  std::vector<Query> queries_;
  std::vector<QueryRecord> records_;
  std::vector<std::uint64_t> seeds_;
  std::map<std::size_t, Seconds> marks_;
  std::map<std::size_t, std::string> sketches_;
  std::map<std::string, std::size_t> job_index_;
  std::deque<CloudTask> cloud_wait_;
  std::map<std::size_t, CloudStream> cloud_streams_;

  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t cloud_version_ = 0;
  Seconds now_ = 0.0;
  std::uint64_t digest_ = stable_hash("");
  std::size_t event_count_ = 0;
  std::size_t arrived_ = 0;
  std::size_t rejected_ = 0;
  std::size_t fallbacks_ = 0;
  Tokens server_tokens_ = 0;
  Tokens edge_tokens_ = 0;

  std::vector<nlohmann::json> decisions_;
  std::vector<DispatchRecord> dispatches_;
  std::vector<ScoringReport> ensembles_;
};

inline RunReport run(const SimConfig& cfg, GenerationBackend* backend = nullptr) {
  return Engine(cfg, backend).run();
}

inline SimConfig with_parameter(SimConfig cfg, const std::string& param, double value) {
  if (param == "rpm") {
    cfg.workload.rpm = value;
  } else if (param == "queue_capacity") {
    cfg.queue.capacity = static_cast<std::size_t>(std::llround(value));
  } else if (param == "bandwidth") {
    cfg.net.bandwidth = value;
  } else if (param == "sketch_level_count") {
    cfg.scheduler.sketch_levels = static_cast<int>(std::llround(value));
  } else {
    throw ConfigError("unknown sweep parameter '" + param +
                      "' (expected rpm, queue_capacity, bandwidth or sketch_level_count)");
  }
  cfg.validate();
  return cfg;
}

// One run per value, all sharing the base seed, in input order.
inline std::vector<RunReport> run_sweep(const SimConfig& base, const std::string& param,
                                        const std::vector<double>& values) {
  if (values.empty()) throw InvalidInputError("run_sweep: no values");
  std::vector<RunReport> out;
  for (double v : values) out.push_back(run(with_parameter(base, param, v)));
  return out;
}

}  // namespace pice::sim
