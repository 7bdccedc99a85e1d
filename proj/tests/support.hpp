// Independent oracles and random generators shared by the test binaries.
// Nothing here calls into the code under test except for plain data types.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pice/cloud_scheduler.hpp"
#include "pice/cost_model.hpp"

namespace oracle {

// Textbook O(n·m) LCS table.
template <typename T>
std::size_t lcs_dp(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

inline double rouge_f_dp(const std::vector<std::string>& ref, const std::vector<std::string>& cand) {
  if (ref.empty() || cand.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_dp(ref, cand));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(cand.size());
  const double r = lcs / static_cast<double>(ref.size());
  return 2.0 * p * r / (p + r);
}

// Strict lexicographic winner: compare metric tuples in priority order,
// flipping maximized metrics, lowest index on full ties.
inline std::size_t lex_sort_winner(const std::vector<pice::MetricVector>& c, const pice::LexOrder& o) {
  std::vector<std::size_t> idx(c.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto key = [&](std::size_t i) {
    std::vector<double> k;
    for (auto m : o.priority) {
      const double v = c[i].get(m);
      k.push_back(o.sense(m) == pice::Sense::kMaximize ? -v : v);
    }
    return k;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return idx.front();
}

// Evaluates the latency constraint term by term.
inline double e2e_slack(double sketch, double answer, const std::vector<pice::Tokens>& queue,
                        const pice::LatencyModel& f, double c, int p, int n,
                        const pice::NetworkModel& net) {
  double waiting = 0.0;
  for (auto l : queue) waiting += c * f.eval(static_cast<double>(l)) / (p * n);
  const double delta = net.base_rtt + sketch * net.bytes_per_token / net.bandwidth;
  return f.eval(answer) - (f.eval(sketch) + delta + c * f.eval(answer) / p + waiting);
}

}  // namespace oracle

namespace gen {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& r, int lo, int hi) {
  return lo + static_cast<int>(r() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double uniform(Rng& r, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(r() >> 11) * 0x1.0p-53);
}

// Words from a deliberately tiny alphabet so random pairs share symbols.
inline std::vector<std::string> words(Rng& r, int max_len, int alphabet = 4) {
  std::vector<std::string> out(static_cast<std::size_t>(uniform_int(r, 0, max_len)));
  for (auto& w : out) w = std::string(1, static_cast<char>('a' + uniform_int(r, 0, alphabet - 1)));
  return out;
}

inline std::string join(const std::vector<std::string>& w) {
  std::string s;
  for (const auto& x : w) {
    if (!s.empty()) s.push_back(' ');
    s += x;
  }
  return s;
}

// Random increasing, non-decreasing-latency curve.
inline pice::LatencyModel latency_model(Rng& r) {
  std::vector<pice::LatencySample> pts;
  double len = 0.0, lat = 0.0;
  const int n = uniform_int(r, 2, 6);
  for (int i = 0; i < n; ++i) {
    len += uniform_int(r, 20, 400);
    lat += uniform(r, 0.0, 30.0);
    pts.push_back({len, lat});
  }
  return pice::LatencyModel(pts, uniform(r, 0.0, 2.0));
}

}  // namespace gen

namespace oracle {

struct LevelChoice {
  bool progressive = false;
  int level = 0;
  pice::Tokens length = 0;
};

// Enumerates every level against e2e_feasible (p = 1) and keeps the
// shortest feasible one at or above the tier floor.
inline LevelChoice exhaustive_level(pice::Tokens l, int levels, const std::vector<pice::Tokens>& queue,
                                    const pice::LatencyModel& f, const pice::CostCoefficient& c,
                                    int devices, const pice::NetworkModel& net, int rank) {
  const double floor_frac = std::min(1.0, 0.2 + 0.1 * rank);
  std::vector<LevelChoice> ok;
  for (int k = 1; k <= levels; ++k) {
    const auto len = static_cast<pice::Tokens>(std::llround(static_cast<double>(k) * l / (levels + 1.0)));
    if (len <= 0) continue;
    auto res = pice::e2e_feasible(static_cast<double>(len), static_cast<double>(l), queue, f, c, {devices, 1}, net);
    if (res.feasible && static_cast<double>(len) >= floor_frac * static_cast<double>(l)) {
      ok.push_back({true, k, len});
    }
  }
  if (ok.empty()) return {};
  return *std::min_element(ok.begin(), ok.end(),
                           [](const LevelChoice& a, const LevelChoice& b) { return a.length < b.length; });
}

}  // namespace oracle

#include <map>
#include <deque>
#include "pice/dispatcher.hpp"

namespace oracle {

struct DispatchEvent {
  bool pull = false;
  int step = 0;
  std::string job_id;              // enqueue
  pice::Tokens length = 0;         // enqueue
  int bucket = -1;                 // pull
  std::vector<std::string> batch;  // pull
};

// Random interleaving of enqueues and pulls against a real queue, followed
// by a drain phase. Returns the event log.
inline std::vector<DispatchEvent> random_dispatch_log(std::uint64_t seed, int events) {
  gen::Rng rng(seed);
  pice::BucketedQueue q({100, 250, 500}, static_cast<std::size_t>(gen::uniform_int(rng, 2, 12)));
  std::vector<DispatchEvent> log;
  int next_id = 0;
  auto pull = [&](int step) {
    pice::DeviceProfile d;
    d.max_batch = gen::uniform_int(rng, 1, 4);
    int bucket = -1;
    auto batch = q.pull_batch(d, &bucket);
    DispatchEvent e;
    e.pull = true;
    e.step = step;
    e.bucket = bucket;
    for (const auto& j : batch) e.batch.push_back(j.query_id);
    log.push_back(std::move(e));
  };
  for (int step = 0; step < events; ++step) {
    if (gen::uniform(rng, 0, 1) < 0.55 && !q.full()) {
      pice::Job j;
      j.query_id = "j" + std::to_string(next_id++);
      j.expected_len = gen::uniform_int(rng, 1, 900);
      j.enqueue_time = step;
      j.sentences = {"s."};
      DispatchEvent e;
      e.step = step;
      e.job_id = j.query_id;
      e.length = j.expected_len;
      q.enqueue(std::move(j));
      log.push_back(std::move(e));
    } else {
      pull(step);
    }
  }
  for (int step = events; !q.empty(); ++step) pull(step);
  return log;
}

struct DispatchCheck {
  bool fifo = true;
  bool single_bucket = true;
  bool longest_list = true;
  bool no_starvation = true;
  std::string detail;
};

// Replays a log against an independent model of the buckets.
inline DispatchCheck check_dispatch_log(const std::vector<DispatchEvent>& log,
                                        const std::vector<pice::Tokens>& edges = {100, 250, 500}) {
  DispatchCheck out;
  auto bucket_of = [&](pice::Tokens l) {
    std::size_t b = 0;
    while (b < edges.size() && l >= edges[b]) ++b;
    return b;
  };
  std::vector<std::deque<std::pair<std::string, int>>> model(edges.size() + 1);
  std::map<std::string, std::size_t> where;
  std::map<std::string, int> pulled;
  for (const auto& e : log) {
    if (!e.pull) {
      const auto b = bucket_of(e.length);
      model[b].push_back({e.job_id, e.step});
      where[e.job_id] = b;
      continue;
    }
    // Expected bucket: most jobs, then oldest head, then lowest index.
    int want = -1;
    for (std::size_t b = 0; b < model.size(); ++b) {
      if (model[b].empty()) continue;
      if (want < 0 || model[b].size() > model[want].size() ||
          (model[b].size() == model[want].size() && model[b].front().second < model[want].front().second)) {
        want = static_cast<int>(b);
      }
    }
    if (want != e.bucket) {
      out.longest_list = false;
      out.detail = "pull at step " + std::to_string(e.step) + " chose bucket " + std::to_string(e.bucket);
    }
    for (const auto& id : e.batch) {
      if (++pulled[id] > 1) out.no_starvation = false;
      auto it = where.find(id);
      if (it == where.end() || static_cast<int>(it->second) != e.bucket) {
        out.single_bucket = false;
        continue;
      }
      auto& dq = model[it->second];
      if (dq.empty() || dq.front().first != id) {
        out.fifo = false;
        auto pos = std::find_if(dq.begin(), dq.end(), [&](const auto& p) { return p.first == id; });
        if (pos != dq.end()) dq.erase(pos);
      } else {
        dq.pop_front();
      }
    }
  }
  for (const auto& [id, b] : where) {
    if (pulled[id] != 1) out.no_starvation = false;
  }
  return out;
}

}  // namespace oracle
