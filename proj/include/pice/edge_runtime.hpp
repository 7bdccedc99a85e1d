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

// Edge-side execution: online model selection for a pulled job, merging of
// sketch sentences into parallel expansion groups, and the expansion itself.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pice/backends.hpp"
#include "pice/cost_model.hpp"
#include "pice/dispatcher.hpp"
#include "pice/ensemble.hpp"
#include "pice/error.hpp"
#include "pice/text.hpp"

namespace pice {

struct SlmEntry {
  std::string model_id;
  int size_rank = 0;
  CostCoefficient cost{1.0};
  double quality = 0.5;
};

// Edge models ordered smallest first.
struct SlmCatalog {
  std::vector<SlmEntry> models;
  Seconds switch_penalty = 5.0;

  void validate() const {
    if (models.empty()) throw ConfigError("SLM catalog is empty");
    for (std::size_t i = 1; i < models.size(); ++i) {
      if (models[i].size_rank < models[i - 1].size_rank) {
        throw ConfigError("SLM catalog must be ordered by size rank ascending");
      }
    }
  }

  std::size_t index_of(const std::string& model_id) const {
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (models[i].model_id == model_id) return i;
    }
    throw ConfigError("model '" + model_id + "' is not in the SLM catalog");
  }

  const SlmEntry& at(const std::string& model_id) const { return models[index_of(model_id)]; }

  // 0 for the largest model, growing toward the smallest.
  int capability_rank(const std::string& model_id) const {
    return static_cast<int>(models.size() - 1 - index_of(model_id));
  }
};

// Estimated seconds for model m to produce the tokens a job still needs.
inline Seconds remaining_time_estimate(const Job& job, const SlmEntry& m, const LatencyModel& f) {
  const double remaining = static_cast<double>(std::max<Tokens>(0, job.expected_len - job.sketch_len));
  return remaining * m.cost.value() * f.seconds_per_token(static_cast<double>(job.expected_len));
}

// Online candidate selection for a pulled job. Downgrade when the current
// model cannot finish within f(l_i) - f(|r_i|); upgrade to the largest model
// that still fits, but only while the queue has spare room.
inline std::string select_model(const Job& job, const std::string& current,
                                 const SlmCatalog& catalog, const LatencyModel& f,
                                 std::size_t queue_size, std::size_t queue_capacity) {
  catalog.validate();
  const std::size_t cur = catalog.index_of(current);
  const double l = static_cast<double>(std::max<Tokens>(1, job.expected_len));
  const Seconds budget = f.eval(l) - f.eval(static_cast<double>(job.sketch_len));
  auto tau = [&](std::size_t i) { return remaining_time_estimate(job, catalog.models[i], f); };

  if (tau(cur) > budget) {
    for (std::size_t i = catalog.models.size(); i-- > 0;) {
      if (tau(i) <= budget) return catalog.models[i].model_id;
    }
    return catalog.models.front().model_id;
  }
  if (queue_size < queue_capacity) {
    for (std::size_t i = catalog.models.size(); i-- > cur + 1;) {
      if (tau(i) < budget) return catalog.models[i].model_id;
    }
  }
  return current;
}

// ---------------------------------------------------------------------------
// Sentence grouping

struct GroupMember {
  std::size_t index = 0;
  std::string text;
  std::size_t word_count = 0;
};

struct ParallelGroup {
  std::vector<GroupMember> members;  // ascending sentence index
  Tokens estimated_output = 0;

  std::size_t word_count() const {
    std::size_t n = 0;
    for (const auto& m : members) n += m.word_count;
    return n;
  }

  std::string sentence_text() const {
    std::string out;
    for (const auto& m : members) {
      if (!out.empty()) out.push_back(' ');
      out += m.text;
    }
    return out;
  }
};

inline Tokens estimate_output(const std::vector<GroupMember>& members, double expansion_factor) {
  Tokens total = 0;
  for (const auto& m : members) total += mock::expansion_length(m.word_count, expansion_factor);
  return total;
}

inline std::vector<ParallelGroup> singleton_groups(const std::vector<std::string>& sentences,
                                                   double expansion_factor) {
  std::vector<ParallelGroup> groups;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    ParallelGroup g;
    g.members.push_back({i, sentences[i], word_count(sentences[i])});
    g.estimated_output = estimate_output(g.members, expansion_factor);
    groups.push_back(std::move(g));
  }
  return groups;
}

// One binary-tree merge step: order groups by word count (largest first,
// ties by lowest sentence index) and pair first with last, second with
// second-to-last, ...; an odd middle group stays alone. k groups become
// ceil(k/2).
inline std::vector<ParallelGroup> merge_pass(std::vector<ParallelGroup> groups,
                                             double expansion_factor) {
  std::stable_sort(groups.begin(), groups.end(), [](const ParallelGroup& a, const ParallelGroup& b) {
    if (a.word_count() != b.word_count()) return a.word_count() > b.word_count();
    return a.members.front().index < b.members.front().index;
  });
  std::vector<ParallelGroup> out;
  const std::size_t k = groups.size();
  for (std::size_t i = 0; i < (k + 1) / 2; ++i) {
    ParallelGroup g = std::move(groups[i]);
    const std::size_t j = k - 1 - i;
    if (j != i) {
      auto& other = groups[j].members;
      g.members.insert(g.members.end(), other.begin(), other.end());
      std::sort(g.members.begin(), g.members.end(),
                [](const GroupMember& a, const GroupMember& b) { return a.index < b.index; });
    }
    g.estimated_output = estimate_output(g.members, expansion_factor);
    out.push_back(std::move(g));
  }
  return out;
}

struct MergeParams {
  Seconds latency_budget = 0.0;
  Tokens memory_budget = 16384;       // prompt tokens resident for one job
  const LatencyModel* f = nullptr;    // cloud latency curve
  CostCoefficient c{1.0};
  int p_max = 8;                      // groups that can decode concurrently
  double expansion_factor = 2.5;
  Tokens prompt_overhead_tokens = 48; // template + query
  Tokens sketch_tokens = 0;
};

// Groups beyond p_max run in waves; each wave is paced by its longest group.
inline Seconds estimate_group_latency(const std::vector<ParallelGroup>& groups,
                                      const MergeParams& p) {
  Tokens longest = 0;
  for (const auto& g : groups) longest = std::max(longest, g.estimated_output);
  const double waves = std::ceil(static_cast<double>(groups.size()) / std::max(1, p.p_max));
  return waves * p.c.value() * p.f->eval(static_cast<double>(longest));
}

inline Tokens prompt_tokens(const std::vector<ParallelGroup>& groups, const MergeParams& p) {
  Tokens total = 0;
  for (const auto& g : groups) {
    total += p.prompt_overhead_tokens + p.sketch_tokens + static_cast<Tokens>(g.word_count());
  }
  return total;
}

// Start from one group per sentence and keep merging while the merged
// layout still meets the latency budget. A layout whose prompts exceed the
// memory budget is merged regardless.
inline std::vector<ParallelGroup> merge_groups(const std::vector<std::string>& sentences,
                                               const MergeParams& p) {
  if (sentences.empty()) throw InvalidInputError("merge_groups: no sentences");
  if (!p.f) throw InvalidInputError("merge_groups: latency model missing");
  auto groups = singleton_groups(sentences, p.expansion_factor);
  while (groups.size() > 1) {
    const bool over_memory = prompt_tokens(groups, p) > p.memory_budget;
    auto merged = merge_pass(groups, p.expansion_factor);
    if (!over_memory && estimate_group_latency(merged, p) > p.latency_budget) break;
    groups = std::move(merged);
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Expansion

inline std::string render_expansion_prompt(std::string_view query, std::string_view sketch,
                                           std::string_view sentence) {
  std::string out;
  out.reserve(query.size() + sketch.size() + sentence.size() + 200);
  out += "I have a question about ";
  out += query;
  out += ". The simplification answer is as follows: ";
  out += sketch;
  out += ". Now, please help me complete and only complete the writing of a short sentence ";
  out += sentence;
  out += ". Do not continue with other sentences!";
  return out;
}

struct ExpansionOutcome {
  std::vector<CandidateResponse> candidates;   // one per sample
  std::vector<Tokens> group_output_tokens;     // first sample, per group
  std::vector<std::vector<Tokens>> stream_tokens;  // [group][sample]
  Tokens generated_tokens = 0;                 // all samples, all groups
  Seconds estimated_latency = 0.0;
};

struct ExpandOptions {
  const LatencyModel* f = nullptr;
  CostCoefficient c{1.0};
  Seconds prompt_overhead_per_group = 0.0;
};

// Expands every group as one parallel batch and stitches the pieces back in
// sentence order. Backend errors propagate to the caller.
inline ExpansionOutcome expand_job(const Job& job, const std::vector<ParallelGroup>& groups,
                                   GenerationBackend& backend, const std::string& model_id,
                                   const ExpandOptions& opts = {}) {
  if (groups.empty()) throw InvalidInputError("expand_job: no groups");
  std::vector<GenerationRequest> reqs;
  for (const auto& g : groups) {
    GenerationRequest r;
    r.prompt = render_expansion_prompt(job.query_text, job.sketch_text, g.sentence_text());
    r.max_tokens = std::max<Tokens>(1, g.estimated_output);
    r.role = Role::kExpansion;
    r.seed = job.seed;
    r.model_id = model_id;
    r.attempt = job.attempts;
    reqs.push_back(std::move(r));
  }
  auto results = backend.generate_batch(reqs);

  std::size_t samples = results.empty() ? 0 : results.front().size();
  for (const auto& r : results) samples = std::min(samples, r.size());
  if (samples == 0) throw BackendError("expand_job: backend returned no results");

  ExpansionOutcome out;
  for (const auto& r : results) {
    std::vector<Tokens> per_sample;
    for (const auto& res : r) per_sample.push_back(res.generated_tokens);
    out.stream_tokens.push_back(std::move(per_sample));
  }
  for (std::size_t s = 0; s < samples; ++s) {
    std::map<std::size_t, std::string> pieces;
    CandidateResponse cand;
    cand.model_id = model_id;
    cand.job_id = job.query_id;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& res = results[g][s];
      const auto& members = groups[g].members;
      auto split = split_sentences(res.text);
      if (split.size() == members.size()) {
        for (std::size_t m = 0; m < members.size(); ++m) pieces[members[m].index] = split[m];
      } else {
        pieces[members.front().index] = res.text;
      }
      cand.token_logprobs.insert(cand.token_logprobs.end(), res.token_logprobs.begin(),
                                 res.token_logprobs.end());
      cand.has_logprobs = cand.has_logprobs && res.logprobs_available;
      out.generated_tokens += res.generated_tokens;
      if (s == 0) out.group_output_tokens.push_back(res.generated_tokens);
    }
    for (const auto& [idx, piece] : pieces) {
      if (!cand.text.empty()) cand.text.push_back(' ');
      cand.text += piece;
    }
    out.candidates.push_back(std::move(cand));
  }
  for (std::size_t s = samples; s < results.front().size(); ++s) {
    // Unequal sample counts across groups: extra samples still cost tokens.
    for (const auto& r : results) {
      if (s < r.size()) out.generated_tokens += r[s].generated_tokens;
    }
  }
  if (opts.f) {
    Tokens longest = *std::max_element(out.group_output_tokens.begin(), out.group_output_tokens.end());
    out.estimated_latency = opts.c.value() * opts.f->eval(static_cast<double>(longest)) +
                            opts.prompt_overhead_per_group * static_cast<double>(groups.size());
  }
  return out;
}

inline nlohmann::json to_json(const SlmCatalog& c) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : c.models) {
    models.push_back({{"model_id", m.model_id},
                      {"size_rank", m.size_rank},
                      {"cost_coefficient", m.cost.value()},
                      {"quality", m.quality}});
  }
  return {{"models", models}, {"switch_penalty_s", c.switch_penalty}};
}

}  // namespace pice
