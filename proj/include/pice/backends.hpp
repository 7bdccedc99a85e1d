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

// Text-generation backends. The mock backend is a seeded stand-in for real
// LLM/SLM inference: it produces sketches, full answers and sentence
// expansions with controlled lengths and synthetic token log-probabilities.
//
// Mock text model. Every query seed owns a latent "ideal answer": an endless
// stream of vocabulary words. A full answer reproduces the first N latent
// words; a sketch keeps every stride-th latent word, cut into short
// sentences; expanding a sketch sentence locates it in the latent stream and
// emits the surrounding span. Model quality q corrupts each emitted word with
// probability (1-q)/2 and shapes the log-probabilities:
//   log p = -(1-q)·E,  E ~ Exp(1),  minus another 2(1-q) for corrupted words,
// plus the model's fixed logprob_bias, clipped at 0. With q = 1 and no bias
// every token has probability 1.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pice/cost_model.hpp"
#include "pice/error.hpp"
#include "pice/random.hpp"
#include "pice/text.hpp"

namespace pice {

enum class Role { kSketch, kFullAnswer, kExpansion };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::kSketch: return "sketch";
    case Role::kFullAnswer: return "full_answer";
    case Role::kExpansion: return "expansion";
  }
  return "?";
}

struct GenerationRequest {
  std::string prompt;
  Tokens max_tokens = 1;  // for sketches: the target length
  Role role = Role::kFullAnswer;
  std::uint64_t seed = 0;
  std::string model_id;
  int attempt = 0;
};

struct GenerationResult {
  std::string text;
  std::vector<double> token_logprobs;
  Tokens generated_tokens = 0;
  Seconds wall_time = 0.0;
  bool logprobs_available = true;
  std::string model_id;
};

struct MockModelSpec {
  std::string model_id;
  double tokens_per_second = 18.82;
  double quality = 0.9;            // [0, 1]
  double expansion_factor = 2.5;   // output tokens per sketch word
  int samples_per_request = 1;
  double logprob_bias = 0.0;       // <= 0; model-specific perplexity offset
  double failure_probability = 0.0;

  void validate() const {
    if (!(tokens_per_second > 0.0) || !(expansion_factor > 0.0) || samples_per_request < 1 ||
        !(quality >= 0.0 && quality <= 1.0) || logprob_bias > 0.0 ||
        !(failure_probability >= 0.0 && failure_probability <= 1.0)) {
      throw ConfigError("invalid mock model spec '" + model_id + "'");
    }
  }
};

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::vector<GenerationResult> generate(const GenerationRequest& req) = 0;

  // One result list per request. Backends with real concurrency override.
  virtual std::vector<std::vector<GenerationResult>> generate_batch(
      std::span<const GenerationRequest> reqs) {
    std::vector<std::vector<GenerationResult>> out;
    out.reserve(reqs.size());
    for (const auto& r : reqs) out.push_back(generate(r));
    return out;
  }
};

namespace mock {

inline constexpr std::array<std::string_view, 160> kVocabulary = {
    "system", "model", "answer", "question", "data", "energy", "light", "water", "city",
    "market", "price", "growth", "river", "forest", "memory", "network", "signal", "value",
    "process", "method", "result", "theory", "language", "history", "culture", "science",
    "travel", "food", "health", "power", "design", "code", "number", "time", "space",
    "field", "force", "motion", "change", "balance", "order", "pattern", "structure",
    "reason", "effect", "cause", "level", "rate", "limit", "range", "scale", "source",
    "path", "point", "line", "shape", "form", "state", "phase", "stage", "step", "task",
    "goal", "plan", "rule", "law", "right", "duty", "trust", "risk", "cost", "gain",
    "loss", "share", "trade", "work", "skill", "tool", "machine", "engine", "device",
    "server", "client", "request", "response", "query", "token", "sketch", "detail",
    "summary", "context", "meaning", "word", "sentence", "story", "poem", "music",
    "color", "sound", "image", "paper", "book", "letter", "message", "report", "review",
    "student", "teacher", "school", "lesson", "exam", "problem", "solution", "proof",
    "example", "case", "study", "test", "trial", "error", "fix", "update", "version",
    "release", "feature", "option", "choice", "decision", "policy", "budget", "income",
    "demand", "supply", "capital", "labor", "region", "country", "nation", "border",
    "coast", "island", "mountain", "valley", "desert", "ocean", "climate", "weather",
    "season", "winter", "summer", "morning", "evening", "night", "garden", "house",
    "bridge", "street", "road", "train", "harbor"};

inline constexpr double kSketchStride = 2.5;
inline constexpr std::string_view kSentenceMarker = "the writing of a short sentence ";
inline constexpr std::string_view kSentenceSuffix = ". Do not continue with other sentences!";

inline std::string_view word_at(std::uint64_t seed, std::size_t pos) {
  // Counter-based so any position is addressable without materializing the prefix.
  return kVocabulary[mix_seed({seed, 0x6c6174656e74ull, pos}) % kVocabulary.size()];
}

inline std::size_t sketch_pos(std::size_t i) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(i) * kSketchStride));
}

// Reference text a perfect model would produce for this seed.
inline std::string latent_text(std::uint64_t seed, Tokens n) {
  std::string out;
  for (Tokens i = 0; i < n; ++i) {
    if (i) out.push_back(' ');
    out += word_at(seed, static_cast<std::size_t>(i));
  }
  return out;
}

class Emitter {
 public:
  Emitter(const MockModelSpec& spec, Rng& rng) : spec_(spec), rng_(rng) {}

  void emit(std::string_view word, bool corruptible = true) {
    const double q = spec_.quality;
    bool corrupted = corruptible && q < 1.0 && rng_.bernoulli((1.0 - q) / 2.0);
    std::string_view w = corrupted ? kVocabulary[rng_.next() % kVocabulary.size()] : word;
    double lp = q < 1.0 ? -(1.0 - q) * rng_.exponential() : 0.0;
    if (corrupted) lp -= 2.0 * (1.0 - q);
    lp = std::min(0.0, lp + spec_.logprob_bias);
    if (!text_.empty() && text_.back() != ' ') text_.push_back(' ');
    text_ += w;
    logprobs_.push_back(lp);
  }

  void end_sentence() {
    if (!text_.empty()) text_.push_back('.');
  }

  std::string text_;
  std::vector<double> logprobs_;

 private:
  const MockModelSpec& spec_;
  Rng& rng_;
};

// Sentence text inside an expansion prompt; the whole prompt if the
// template markers are absent.
inline std::string_view extract_sentences(std::string_view prompt) {
  auto b = prompt.find(kSentenceMarker);
  if (b == std::string_view::npos) return prompt;
  b += kSentenceMarker.size();
  auto e = prompt.rfind(kSentenceSuffix);
  if (e == std::string_view::npos || e < b) return prompt.substr(b);
  return prompt.substr(b, e - b);
}

// Index i0 such that the sketch words sit at latent stride positions
// i0, i0+1, ...; search bounded by max_index.
inline std::optional<std::size_t> locate(std::uint64_t seed, const std::vector<std::string>& words,
                                         std::size_t max_index = 4096) {
  if (words.empty()) return std::nullopt;
  for (std::size_t i0 = 0; i0 < max_index; ++i0) {
    bool ok = true;
    for (std::size_t j = 0; j < words.size() && ok; ++j) {
      ok = word_at(seed, sketch_pos(i0 + j)) == words[j];
    }
    if (ok) return i0;
  }
  return std::nullopt;
}

inline Tokens expansion_length(std::size_t sketch_words, double expansion_factor) {
  return std::max<Tokens>(
      1, static_cast<Tokens>(std::llround(static_cast<double>(sketch_words) * expansion_factor)));
}

inline GenerationResult generate_one(const GenerationRequest& req, const MockModelSpec& spec,
                                     int sample) {
  Rng rng(mix_seed({req.seed, stable_hash(req.prompt), stable_hash(spec.model_id),
                    static_cast<std::uint64_t>(sample), static_cast<std::uint64_t>(req.attempt)}));
  Emitter em(spec, rng);
  switch (req.role) {
    case Role::kFullAnswer: {
      const Tokens n = std::max<Tokens>(1, req.max_tokens);
      Rng shape(mix_seed({req.seed, 0x66756c6cull}));
      Tokens in_sentence = 0, sentence_len = shape.uniform_int(10, 20);
      for (Tokens i = 0; i < n; ++i) {
        em.emit(word_at(req.seed, static_cast<std::size_t>(i)));
        if (++in_sentence == sentence_len || i + 1 == n) {
          em.end_sentence();
          in_sentence = 0;
          sentence_len = shape.uniform_int(10, 20);
        }
      }
      break;
    }
    case Role::kSketch: {
      // Length jitter and sentence shape depend on the query only, so every
      // sample shares the same sketch skeleton.
      Rng shape(mix_seed({req.seed, 0x736b65746368ull, static_cast<std::uint64_t>(req.attempt)}));
      const Tokens n = std::max<Tokens>(1, req.max_tokens + shape.uniform_int(-10, 10));
      Tokens in_sentence = 0, sentence_len = shape.uniform_int(4, 8);
      for (Tokens i = 0; i < n; ++i) {
        // Sketch words stay exact so the edge can anchor its expansions.
        em.emit(word_at(req.seed, sketch_pos(static_cast<std::size_t>(i))), false);
        if (++in_sentence == sentence_len || i + 1 == n) {
          em.end_sentence();
          in_sentence = 0;
          sentence_len = shape.uniform_int(4, 8);
        }
      }
      break;
    }
    case Role::kExpansion: {
      for (const auto& sentence : split_sentences(extract_sentences(req.prompt))) {
        const auto words = normalized_words(sentence);
        if (words.empty()) continue;
        const Tokens out_len = expansion_length(words.size(), spec.expansion_factor);
        if (auto i0 = locate(req.seed, words)) {
          const std::size_t start = sketch_pos(*i0);
          for (Tokens t = 0; t < out_len; ++t) {
            em.emit(word_at(req.seed, start + static_cast<std::size_t>(t)));
          }
        } else {
          // Unknown sketch: keep its words spaced out, pad with filler.
          const auto step = std::max<Tokens>(1, out_len / static_cast<Tokens>(words.size()));
          for (Tokens t = 0; t < out_len; ++t) {
            std::size_t k = static_cast<std::size_t>(t / step);
            if (t % step == 0 && k < words.size()) {
              em.emit(words[k]);
            } else {
              em.emit(kVocabulary[rng.next() % kVocabulary.size()]);
            }
          }
        }
        em.end_sentence();
      }
      if (em.logprobs_.empty()) em.emit(kVocabulary[0]);
      break;
    }
  }
  GenerationResult r;
  r.text = std::move(em.text_);
  r.token_logprobs = std::move(em.logprobs_);
  r.generated_tokens = static_cast<Tokens>(r.token_logprobs.size());
  r.wall_time = static_cast<double>(r.generated_tokens) / spec.tokens_per_second;
  r.model_id = spec.model_id;
  return r;
}

}  // namespace mock

// Deterministic in (seed, prompt, spec, attempt). Returns
// samples_per_request results.
inline std::vector<GenerationResult> generate(const GenerationRequest& req,
                                              const MockModelSpec& spec) {
  spec.validate();
  if (spec.failure_probability > 0.0) {
    Rng fail(mix_seed({req.seed, stable_hash(req.prompt), stable_hash(spec.model_id),
                       static_cast<std::uint64_t>(req.attempt), 0x6661696cull}));
    if (fail.bernoulli(spec.failure_probability)) {
      throw BackendError("mock backend failure for model " + spec.model_id);
    }
  }
  std::vector<GenerationResult> out;
  out.reserve(static_cast<std::size_t>(spec.samples_per_request));
  for (int s = 0; s < spec.samples_per_request; ++s) out.push_back(mock::generate_one(req, spec, s));
  return out;
}

class MockBackend : public GenerationBackend {
 public:
  MockBackend() = default;
  explicit MockBackend(const std::vector<MockModelSpec>& specs) {
    for (const auto& s : specs) add(s);
  }

  void add(const MockModelSpec& spec) {
    spec.validate();
    specs_[spec.model_id] = spec;
  }

  const MockModelSpec& spec(const std::string& model_id) const {
    auto it = specs_.find(model_id);
    if (it == specs_.end()) throw ConfigError("mock backend has no model '" + model_id + "'");
    return it->second;
  }

  std::vector<GenerationResult> generate(const GenerationRequest& req) override {
    return pice::generate(req, spec(req.model_id));
  }

 private:
  std::map<std::string, MockModelSpec> specs_;
};

inline nlohmann::json to_json(const MockModelSpec& s) {
  return {{"model_id", s.model_id},
          {"tokens_per_second", s.tokens_per_second},
          {"quality", s.quality},
          {"expansion_factor", s.expansion_factor},
          {"samples_per_request", s.samples_per_request},
          {"logprob_bias", s.logprob_bias},
          {"failure_probability", s.failure_probability}};
}

inline MockModelSpec mock_model_spec_from_json(const nlohmann::json& j) {
  MockModelSpec s;
  try {
    s.model_id = j.at("model_id").get<std::string>();
    s.tokens_per_second = j.value("tokens_per_second", s.tokens_per_second);
    s.quality = j.value("quality", s.quality);
    s.expansion_factor = j.value("expansion_factor", s.expansion_factor);
    s.samples_per_request = j.value("samples_per_request", s.samples_per_request);
    s.logprob_bias = j.value("logprob_bias", s.logprob_bias);
    s.failure_probability = j.value("failure_probability", s.failure_probability);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model spec: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace pice
