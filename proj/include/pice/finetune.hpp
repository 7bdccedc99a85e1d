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

// Dataset tooling for sketch-preference fine-tuning: sketch scoring, pair
// labeling, the reward-model pairwise loss and the KL-regularized objective.

#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pice/ensemble.hpp"
#include "pice/error.hpp"
#include "pice/text.hpp"

namespace pice {

struct SketchPair {
  std::string input_text;
  std::string sketch_a;
  std::string sketch_b;
  std::string full_answer_a;
  std::string full_answer_b;
  std::string reference_answer;
};

struct PreferenceWeights {
  double beta1 = 4.0;  // weight on 1 / sketch length
  double beta2 = 1.0;  // weight on ROUGE-L of the expansion

  void validate() const {
    if (!(beta1 >= 0.0) || !(beta2 >= 0.0)) throw ConfigError("preference weights must be >= 0");
    if (beta1 == 0.0 && beta2 == 0.0) throw ConfigError("preference weights cannot both be zero");
  }
};

struct PreferenceTriplet {
  std::string input_text;
  std::string winner_sketch;
  std::string loser_sketch;
  double winner_score = 0.0;
  double loser_score = 0.0;
};

// Sketch length is counted in words.
inline double sketch_score(const std::string& sketch, const std::string& expanded,
                           const std::string& reference, const PreferenceWeights& w) {
  w.validate();
  const std::size_t len = word_count(sketch);
  if (len == 0) throw InvalidInputError("sketch_score: empty sketch");
  return w.beta1 / static_cast<double>(len) + w.beta2 * rouge_l(reference, expanded);
}

// Higher score wins; an exact tie goes to the shorter sketch, then to a.
inline PreferenceTriplet label_pair(const SketchPair& pair, const PreferenceWeights& w) {
  const double sa = sketch_score(pair.sketch_a, pair.full_answer_a, pair.reference_answer, w);
  const double sb = sketch_score(pair.sketch_b, pair.full_answer_b, pair.reference_answer, w);
  bool a_wins = sa > sb;
  if (sa == sb) a_wins = word_count(pair.sketch_a) <= word_count(pair.sketch_b);
  if (a_wins) return {pair.input_text, pair.sketch_a, pair.sketch_b, sa, sb};
  return {pair.input_text, pair.sketch_b, pair.sketch_a, sb, sa};
}

// -log(sigmoid(d)) = log1p(exp(-d)), rearranged to avoid overflow.
inline double rm_pairwise_loss(double reward_winner, double reward_loser) {
  if (!std::isfinite(reward_winner) || !std::isfinite(reward_loser)) {
    throw InvalidInputError("rm_pairwise_loss: rewards must be finite");
  }
  const double d = reward_winner - reward_loser;
  if (d >= 0.0) return std::log1p(std::exp(-d));
  return -d + std::log1p(std::exp(d));
}

// Natural-log KL(policy || sft), with 0 * ln(0 / q) taken as 0.
inline double kl_divergence(std::span<const double> policy, std::span<const double> sft) {
  if (policy.size() != sft.size() || policy.empty()) {
    throw InvalidInputError("kl_divergence: distributions must share a non-empty support");
  }
  auto check = [](std::span<const double> d, const char* name) {
    double sum = 0.0;
    for (double v : d) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidInputError(std::string("kl_divergence: negative or non-finite mass in ") + name);
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidInputError(std::string("kl_divergence: ") + name + " does not sum to 1");
    }
  };
  check(policy, "policy");
  check(sft, "sft");
  double kl = 0.0;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    if (policy[i] == 0.0) continue;
    if (sft[i] == 0.0) throw DivergenceUndefinedError("policy has mass outside the sft support");
    kl += policy[i] * std::log(policy[i] / sft[i]);
  }
  return kl;
}

inline double kl_regularized_objective(double reward_expectation, std::span<const double> policy,
                                       std::span<const double> sft, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInputError("gamma must lie in [0, 1]");
  return (1.0 - gamma) * reward_expectation - gamma * kl_divergence(policy, sft);
}

inline nlohmann::json to_json(const PreferenceTriplet& t) {
  return {{"input", t.input_text},
          {"winner", t.winner_sketch},
          {"loser", t.loser_sketch},
          {"winner_score", t.winner_score},
          {"loser_score", t.loser_score}};
}

inline SketchPair sketch_pair_from_json(const nlohmann::json& j) {
  try {
    SketchPair p;
    p.input_text = j.at("input").get<std::string>();
    p.sketch_a = j.at("sketch_a").get<std::string>();
    p.sketch_b = j.at("sketch_b").get<std::string>();
    p.full_answer_a = j.at("full_answer_a").get<std::string>();
    p.full_answer_b = j.at("full_answer_b").get<std::string>();
    p.reference_answer = j.at("reference").get<std::string>();
    if (trim(p.sketch_a).empty() || trim(p.sketch_b).empty()) {
      throw InvalidInputError("sketch pair has an empty sketch");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("malformed sketch pair: ") + e.what());
  }
}

// One JSON object per line.
inline void write_triplets(std::ostream& os, std::span<const PreferenceTriplet> triplets) {
  for (const auto& t : triplets) os << to_json(t).dump() << '\n';
}

}  // namespace pice
