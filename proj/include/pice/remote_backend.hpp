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

// Client for a completion-style HTTP endpoint. Request body:
//   {"model", "prompt", "max_tokens", "logprobs": true}
// Response: {"choices": [{"text", "logprobs": {"token_logprobs": [...]}}],
//            "usage": {"completion_tokens"}}

#pragma once

#include <chrono>
#include <future>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "pice/backends.hpp"
#include "pice/error.hpp"
#include "pice/text.hpp"

namespace pice {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path = "/v1/completions";
};

inline Endpoint parse_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  if (path_start != std::string::npos && path_start + 1 < url.size()) {
    ep.path = url.substr(path_start);
  }
  return ep;
}

inline nlohmann::json completion_request_body(const GenerationRequest& req) {
  return {{"model", req.model_id},
          {"prompt", req.prompt},
          {"max_tokens", req.max_tokens},
          {"logprobs", true}};
}

// Parses a completion response body. Missing log-probabilities are not an
// error; the result is flagged and scoring falls back to text terms only.
inline GenerationResult parse_completion_response(const std::string& body,
                                                  const std::string& model_id) {
  GenerationResult r;
  r.model_id = model_id;
  try {
    auto j = nlohmann::json::parse(body);
    const auto& choice = j.at("choices").at(0);
    r.text = choice.at("text").get<std::string>();
    const nlohmann::json* lps = nullptr;
    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("token_logprobs")) {
      lps = &choice["logprobs"]["token_logprobs"];
    }
    if (lps && lps->is_array() && !lps->empty()) {
      for (const auto& v : *lps) {
        if (v.is_null()) continue;  // some servers emit null for the first token
        double lp = v.get<double>();
        if (lp > 0.0) throw ProtocolError("log-probability above zero in response");
        r.token_logprobs.push_back(lp);
      }
    }
    r.logprobs_available = !r.token_logprobs.empty();
    if (j.contains("usage") && j["usage"].contains("completion_tokens")) {
      r.generated_tokens = j["usage"]["completion_tokens"].get<Tokens>();
    } else if (r.logprobs_available) {
      r.generated_tokens = static_cast<Tokens>(r.token_logprobs.size());
    } else {
      r.generated_tokens = static_cast<Tokens>(word_count(r.text));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed completion response: ") + e.what());
  }
  return r;
}

inline GenerationResult remote_complete(const GenerationRequest& req, const std::string& url,
                                        double timeout_s) {
  const Endpoint ep = parse_endpoint(url);
  httplib::Client cli(ep.origin);
  const auto sec = static_cast<time_t>(timeout_s);
  const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);

  const auto start = std::chrono::steady_clock::now();
  auto res = cli.Post(ep.path, completion_request_body(req).dump(), "application/json");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!res) {
    const auto err = res.error();
    const std::string what = "completion request to " + url + " failed: " + httplib::to_string(err);
    switch (err) {
      case httplib::Error::Connection:
      case httplib::Error::Read:
      case httplib::Error::Write:
      case httplib::Error::ConnectionTimeout:
        throw RetryableError(what);
      default:
        throw BackendError(what);
    }
  }
  if (res->status >= 500 || res->status == 429) {
    throw RetryableError("completion endpoint returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ProtocolError("completion endpoint returned HTTP " + std::to_string(res->status));
  }
  GenerationResult r = parse_completion_response(res->body, req.model_id);
  r.wall_time = elapsed;
  return r;
}

// Every request of a batch is sent concurrently with its own timeout.
class RemoteBackend : public GenerationBackend {
 public:
  RemoteBackend(std::string url, double timeout_s) : url_(std::move(url)), timeout_s_(timeout_s) {}

  std::vector<GenerationResult> generate(const GenerationRequest& req) override {
    return {remote_complete(req, url_, timeout_s_)};
  }

  std::vector<std::vector<GenerationResult>> generate_batch(
      std::span<const GenerationRequest> reqs) override {
    std::vector<std::future<GenerationResult>> futs;
    futs.reserve(reqs.size());
    for (const auto& r : reqs) {
      futs.push_back(std::async(std::launch::async,
                                [this, r] { return remote_complete(r, url_, timeout_s_); }));
    }
    std::vector<std::vector<GenerationResult>> out;
    for (auto& f : futs) out.push_back({f.get()});
    return out;
  }

 private:
  std::string url_;
  double timeout_s_;
};

}  // namespace pice
