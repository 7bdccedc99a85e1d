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

// A processor-sharing token server. Every active stream decodes at
// rate / (1 + slowdown * (n - 1)) tokens per second when n streams share the
// server, so adding a stream slows the others down.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "pice/cost_model.hpp"
#include "pice/error.hpp"

namespace pice::sim {

class PsServer {
 public:
  PsServer(double tokens_per_second = 1.0, double slowdown = 0.0)
      : rate_(tokens_per_second), slowdown_(slowdown) {
    if (!(rate_ > 0.0) || !(slowdown_ >= 0.0)) throw ConfigError("invalid server rate or slowdown");
  }

  double per_stream_rate(std::size_t n) const {
    return n == 0 ? rate_ : rate_ / (1.0 + slowdown_ * static_cast<double>(n - 1));
  }

  void set_rate(double tokens_per_second) {
    if (!(tokens_per_second > 0.0)) throw ConfigError("invalid server rate");
    rate_ = tokens_per_second;
  }

  std::size_t active() const { return streams_.size(); }

  // Brings the shared progress counter up to time t.
  void advance(Seconds t) {
    if (t < last_) t = last_;
    if (!streams_.empty()) served_ += (t - last_) * per_stream_rate(streams_.size());
    last_ = t;
  }

  void add(Seconds t, std::uint64_t id, Tokens tokens) {
    advance(t);
    streams_.push_back({id, served_ + static_cast<double>(std::max<Tokens>(0, tokens))});
  }

  // Streams finished by time t, in the order they were added.
  std::vector<std::uint64_t> pop_finished(Seconds t) {
    advance(t);
    std::vector<std::uint64_t> done;
    std::vector<Stream> keep;
    for (const auto& s : streams_) {
      if (s.finish <= served_ + kEps) {
        done.push_back(s.id);
      } else {
        keep.push_back(s);
      }
    }
    streams_ = std::move(keep);
    return done;
  }

  Seconds next_finish_time() const {
    if (streams_.empty()) return std::numeric_limits<double>::infinity();
    double min_finish = streams_.front().finish;
    for (const auto& s : streams_) min_finish = std::min(min_finish, s.finish);
    return last_ + std::max(0.0, min_finish - served_) / per_stream_rate(streams_.size());
  }

 private:
  struct Stream {
    std::uint64_t id;
    double finish;  // progress counter value at which the stream completes
  };
  static constexpr double kEps = 1e-7;
  double rate_;
  double slowdown_;
  double served_ = 0.0;
  Seconds last_ = 0.0;
  std::vector<Stream> streams_;
};

}  // namespace pice::sim
