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

// Multi-list job queue. Jobs are bucketed by expected answer length so that
// an idle edge device pulls a length-homogeneous batch from the fullest
// bucket.

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pice/cost_model.hpp"
#include "pice/error.hpp"

namespace pice {

// A sketch-expansion task travelling from the cloud to the edge.
struct Job {
  std::string query_id;
  std::string query_text;
  std::string sketch_text;
  std::vector<std::string> sentences;
  Tokens expected_len = 0;  // l_i
  Tokens sketch_len = 0;    // |r_i|
  Seconds enqueue_time = 0.0;
  Seconds deadline_budget = 0.0;  // f(l_i)
  Seconds arrival_time = 0.0;     // of the originating query
  std::uint64_t seed = 0;
  int attempts = 0;
  bool full_answer = false;  // edge generates the whole answer (baselines)
};

struct DeviceProfile {
  std::string id;
  int max_batch = 2;             // jobs per pull
  int parallelism = 8;           // concurrent sentence groups per job
  Tokens memory_budget = 16384;  // prompt tokens a job may keep resident
  double batch_slowdown = 0.1;   // per extra concurrent stream
  double prefill_tokens_per_s = 2000.0;
  std::string initial_model;
};

struct DispatchRecord {
  Seconds time = 0.0;
  std::string device_id;
  int bucket_index = -1;
  std::vector<std::string> job_ids;
};

class BucketedQueue {
 public:
  // Upper edges of all but the last bucket. {100, 250, 500} gives
  // [0,100) [100,250) [250,500) [500,inf).
  explicit BucketedQueue(std::vector<Tokens> edges = {100, 250, 500},
                         std::size_t capacity = 8)
      : edges_(std::move(edges)), buckets_(edges_.size() + 1), capacity_(capacity) {
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (edges_[i] <= 0 || (i > 0 && edges_[i] <= edges_[i - 1])) {
        throw ConfigError("bucket edges must be positive and strictly increasing");
      }
    }
    if (capacity_ == 0) throw ConfigError("queue capacity must be >= 1");
  }

  std::size_t bucket_for(Tokens expected_len) const {
    return static_cast<std::size_t>(
        std::upper_bound(edges_.begin(), edges_.end(), expected_len) - edges_.begin());
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool full() const { return size_ >= capacity_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t bucket_count() const { return buckets_.size(); }
  const std::deque<Job>& bucket(std::size_t i) const { return buckets_.at(i); }
  const std::vector<Tokens>& edges() const { return edges_; }

  // Appends to the FIFO tail of the job's bucket and returns the bucket
  // index. Throws BackpressureError when full.
  std::size_t enqueue(Job job) {
    if (full()) throw BackpressureError("job queue at capacity");
    if (job.sketch_len > job.expected_len) {
      throw InvalidInputError("job sketch_len exceeds expected_len");
    }
    std::size_t b = bucket_for(job.expected_len);
    buckets_[b].push_back(std::move(job));
    ++size_;
    return b;
  }

  // Fullest bucket; ties go to the oldest head job, then the lowest index.
  std::optional<std::size_t> longest_bucket() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < buckets_.size(); ++i) {
      const auto& b = buckets_[i];
      if (b.empty()) continue;
      if (!best) {
        best = i;
        continue;
      }
      const auto& cur = buckets_[*best];
      if (b.size() > cur.size() ||
          (b.size() == cur.size() && b.front().enqueue_time < cur.front().enqueue_time)) {
        best = i;
      }
    }
    return best;
  }

  // Removes up to max_batch jobs from the head of the fullest bucket.
  std::vector<Job> pull_batch(const DeviceProfile& device, int* bucket_out = nullptr) {
    std::vector<Job> batch;
    auto b = longest_bucket();
    if (bucket_out) *bucket_out = b ? static_cast<int>(*b) : -1;
    if (!b) return batch;
    auto& q = buckets_[*b];
    const std::size_t n = std::min<std::size_t>(q.size(), std::max(1, device.max_batch));
    for (std::size_t i = 0; i < n; ++i) {
      batch.push_back(std::move(q.front()));
      q.pop_front();
    }
    size_ -= n;
    return batch;
  }

  // Expected lengths of every queued job, bucket by bucket.
  std::vector<Tokens> queue_token_load() const {
    std::vector<Tokens> out;
    out.reserve(size_);
    for (const auto& b : buckets_) {
      for (const auto& j : b) out.push_back(j.expected_len);
    }
    return out;
  }

 private:
  std::vector<Tokens> edges_;
  std::vector<std::deque<Job>> buckets_;
  std::size_t capacity_;
  std::size_t size_ = 0;
};

inline std::vector<Tokens> queue_token_load(const BucketedQueue& q) { return q.queue_token_load(); }

// Mutex-guarded queue for deployments with real producer/consumer threads.
// Every operation is linearizable; a job is handed to at most one puller.
class SharedBucketedQueue {
 public:
  explicit SharedBucketedQueue(BucketedQueue q) : queue_(std::move(q)) {}

  bool try_enqueue(Job job) {
    std::lock_guard lock(mu_);
    if (queue_.full()) return false;
    queue_.enqueue(std::move(job));
    return true;
  }

  std::vector<Job> pull_batch(const DeviceProfile& device) {
    std::lock_guard lock(mu_);
    return queue_.pull_batch(device);
  }

  std::vector<Tokens> queue_token_load() const {
    std::lock_guard lock(mu_);
    return queue_.queue_token_load();
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return queue_.size();
  }

 private:
  mutable std::mutex mu_;
  BucketedQueue queue_;
};

inline nlohmann::json to_json(const DispatchRecord& r) {
  return {{"time", r.time},
          {"device_id", r.device_id},
          {"bucket_index", r.bucket_index},
          {"job_ids", r.job_ids},
          {"batch_size", r.job_ids.size()}};
}

}  // namespace pice
