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

// Candidate scoring for the edge ensemble. A candidate's confidence mixes
// its geometric-mean token probability (inverse perplexity), its length
// relative to the other candidates of the same job, and its ROUGE-L
// agreement with the sketch it was expanded from.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "pice/error.hpp"
#include "pice/text.hpp"

namespace pice {

struct CandidateResponse {
  std::string text;
  std::vector<double> token_logprobs;  // natural log, each <= 0
  std::string model_id;
  std::string job_id;
  bool has_logprobs = true;  // false for remote results that omitted them
};

struct ConfidenceWeights {
  double alpha1 = 0.4;  // geometric-mean probability
  double alpha2 = 0.2;  // normalized length

  void validate() const {
    if (!(alpha1 >= 0.0 && alpha1 <= 1.0 && alpha2 >= 0.0 && alpha2 <= 1.0) ||
        alpha1 + alpha2 > 1.0 + 1e-12) {
      throw InvalidInputError("confidence weights need alpha1, alpha2 in [0,1] and alpha1 + alpha2 <= 1");
    }
  }

  double rouge_weight() const { return 1.0 - alpha1 - alpha2; }

  // Weights to use when a candidate has no log-probabilities: alpha1 is
  // spread over the other two terms in proportion to their weights.
  ConfidenceWeights without_geo() const {
    if (alpha1 >= 1.0) return {0.0, 0.0};
    return {0.0, alpha2 / (1.0 - alpha1)};
  }
};

// Length of the longest common subsequence of two symbol sequences, using
// the bit-parallel formulation (64 columns per machine word).
template <typename T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  if (a.empty() || b.empty()) return 0;
  const std::size_t m = a.size();
  const std::size_t nwords = (m + 63) / 64;
  std::unordered_map<T, std::vector<std::uint64_t>> masks;
  for (std::size_t i = 0; i < m; ++i) {
    auto& mk = masks[a[i]];
    if (mk.empty()) mk.assign(nwords, 0);
    mk[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  std::vector<std::uint64_t> v(nwords, ~std::uint64_t{0});
  for (const T& sym : b) {
    auto it = masks.find(sym);
    if (it == masks.end()) continue;
    const auto& mk = it->second;
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < nwords; ++w) {
      const std::uint64_t u = v[w] & mk[w];
      const std::uint64_t s1 = v[w] + u;
      const std::uint64_t c1 = s1 < v[w];
      const std::uint64_t s2 = s1 + carry;
      const std::uint64_t c2 = s2 < s1;
      v[w] = s2 | (v[w] & ~mk[w]);
      carry = c1 | c2;
    }
  }
  std::size_t zeros = 0;
  for (std::size_t w = 0; w < nwords; ++w) {
    std::uint64_t word = v[w];
    if (w == nwords - 1 && m % 64) word |= ~std::uint64_t{0} << (m % 64);
    zeros += static_cast<std::size_t>(std::popcount(~word));
  }
  return zeros;
}

// F-measure from an LCS length and the two sequence lengths (beta = 1).
inline double rouge_f(std::size_t lcs, std::size_t ref_len, std::size_t cand_len) {
  if (lcs == 0 || ref_len == 0 || cand_len == 0) return 0.0;
  const double p = static_cast<double>(lcs) / static_cast<double>(cand_len);
  const double r = static_cast<double>(lcs) / static_cast<double>(ref_len);
  return 2.0 * p * r / (p + r);
}

inline double rouge_l_words(const std::vector<std::string>& reference,
                            const std::vector<std::string>& candidate) {
  std::size_t lcs = lcs_length<std::string>(reference, candidate);
  return rouge_f(lcs, reference.size(), candidate.size());
}

inline double rouge_l(std::string_view reference, std::string_view candidate) {
  return rouge_l_words(normalized_words(reference), normalized_words(candidate));
}

// exp(mean log p) == 2^{mean log2 p}; the reciprocal of perplexity.
inline double geo_prob(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) throw InvalidInputError("geo_prob: no tokens");
  double sum = 0.0;
  for (double lp : token_logprobs) {
    if (!(lp <= 0.0)) throw InvalidInputError("geo_prob: log-probability above zero");
    sum += lp;
  }
  return std::exp(sum / static_cast<double>(token_logprobs.size()));
}

inline std::vector<double> length_norm(std::span<const CandidateResponse> candidates) {
  std::vector<double> lens;
  lens.reserve(candidates.size());
  double max_len = 0.0;
  for (const auto& c : candidates) {
    lens.push_back(static_cast<double>(word_count(c.text)));
    max_len = std::max(max_len, lens.back());
  }
  for (double& l : lens) l = max_len > 0.0 ? l / max_len : 1.0;
  return lens;
}

struct ConfidenceParts {
  double geo_prob = 0.0;
  double norm = 0.0;
  double rouge = 0.0;
  double confidence = 0.0;
  bool degraded = false;  // no log-probabilities; alpha1 redistributed
};

// Optional per-model shift of the mean log-probability, for models whose
// perplexity is systematically off. Empty means no calibration.
using GeoCalibration = std::map<std::string, double>;

inline ConfidenceParts confidence_parts(const CandidateResponse& cand, std::string_view sketch,
                                        double norm, const ConfidenceWeights& w,
                                        const GeoCalibration& calibration = {}) {
  w.validate();
  ConfidenceParts parts;
  parts.norm = norm;
  parts.rouge = rouge_l(sketch, cand.text);
  ConfidenceWeights eff = w;
  if (cand.has_logprobs && !cand.token_logprobs.empty()) {
    parts.geo_prob = geo_prob(cand.token_logprobs);
    if (auto it = calibration.find(cand.model_id); it != calibration.end()) {
      parts.geo_prob = std::min(1.0, parts.geo_prob * std::exp(it->second));
    }
  } else {
    parts.degraded = true;
    eff = w.without_geo();
  }
  parts.confidence = eff.alpha1 * parts.geo_prob + eff.alpha2 * parts.norm +
                     eff.rouge_weight() * parts.rouge;
  return parts;
}

inline double confidence(const CandidateResponse& cand, std::string_view sketch, double norm,
                         const ConfidenceWeights& w) {
  return confidence_parts(cand, sketch, norm, w).confidence;
}

struct ScoringReport {
  std::string job_id;
  std::vector<std::string> model_ids;
  std::vector<ConfidenceParts> parts;
  std::size_t winner = 0;
};

inline ScoringReport score_candidates(std::span<const CandidateResponse> candidates,
                                      std::string_view sketch, const ConfidenceWeights& w,
                                      const GeoCalibration& calibration = {}) {
  if (candidates.empty()) throw InvalidInputError("select_best: no candidates");
  ScoringReport report;
  report.job_id = candidates.front().job_id;
  const auto norms = length_norm(candidates);
  std::vector<std::size_t> lens;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    report.model_ids.push_back(candidates[i].model_id);
    report.parts.push_back(confidence_parts(candidates[i], sketch, norms[i], w, calibration));
    lens.push_back(word_count(candidates[i].text));
  }
  // Highest confidence, then longest text, then smallest model id.
  auto better = [&](std::size_t a, std::size_t b) {
    if (report.parts[a].confidence != report.parts[b].confidence) {
      return report.parts[a].confidence > report.parts[b].confidence;
    }
    if (lens[a] != lens[b]) return lens[a] > lens[b];
    return candidates[a].model_id < candidates[b].model_id;
  };
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (better(i, report.winner)) report.winner = i;
  }
  return report;
}

inline const CandidateResponse& select_best(std::span<const CandidateResponse> candidates,
                                            std::string_view sketch,
                                            const ConfidenceWeights& w) {
  return candidates[score_candidates(candidates, sketch, w).winner];
}

inline nlohmann::json to_json(const ScoringReport& r) {
  nlohmann::json cands = nlohmann::json::array();
  for (std::size_t i = 0; i < r.parts.size(); ++i) {
    const auto& p = r.parts[i];
    cands.push_back({{"model_id", r.model_ids[i]},
                     {"geo_prob", p.geo_prob},
                     {"norm", p.norm},
                     {"rouge", p.rouge},
                     {"confidence", p.confidence},
                     {"degraded", p.degraded}});
  }
  return {{"job_id", r.job_id}, {"candidates", cands}, {"winner", r.winner}};
}

}  // namespace pice
