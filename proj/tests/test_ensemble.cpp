#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pice/ensemble.hpp"
#include "support.hpp"

using namespace pice;

namespace {

CandidateResponse cand(std::string text, std::vector<double> lps, std::string model = "m") {
  CandidateResponse c;
  c.text = std::move(text);
  c.token_logprobs = std::move(lps);
  c.model_id = std::move(model);
  c.job_id = "j";
  return c;
}

// Scores from first principles: DP ROUGE, mean log-prob, max-length ratio.
std::vector<double> oracle_confidences(const std::vector<CandidateResponse>& cs, const std::string& sketch,
                                       double a1, double a2) {
  std::size_t max_len = 0;
  for (const auto& c : cs) max_len = std::max(max_len, normalized_words(c.text).size());
  std::vector<double> out;
  for (const auto& c : cs) {
    double mean = std::accumulate(c.token_logprobs.begin(), c.token_logprobs.end(), 0.0) /
                  static_cast<double>(c.token_logprobs.size());
    double norm = max_len ? static_cast<double>(normalized_words(c.text).size()) / static_cast<double>(max_len) : 1.0;
    double r = oracle::rouge_f_dp(normalized_words(sketch), normalized_words(c.text));
    out.push_back(a1 * std::exp(mean) + a2 * norm + (1 - a1 - a2) * r);
  }
  return out;
}

}  // namespace

TEST(RougeL, Examples) {
  EXPECT_NEAR(rouge_l("the cat sat", "the cat ran"), 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(rouge_l("a b c", "a b c"), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l("a b c", "x y z"), 0.0);
  EXPECT_DOUBLE_EQ(rouge_l("", "a"), 0.0);
  // Case and punctuation are ignored.
  EXPECT_DOUBLE_EQ(rouge_l("The Cat, sat.", "the cat sat"), 1.0);
  // p = 2/4, r = 1 -> F = 2/3.
  EXPECT_NEAR(rouge_l("a b", "a x b y"), 2.0 / 3.0, 1e-12);
}

TEST(RougeLProperty, MatchesDynamicProgrammingOracle) {
  gen::Rng rng(40);
  for (int t = 0; t < 3000; ++t) {
    // Lengths beyond 64 exercise the multi-word carry.
    const int max_len = t % 3 == 0 ? 300 : 40;
    auto a = gen::words(rng, max_len, gen::uniform_int(rng, 2, 8));
    auto b = gen::words(rng, max_len, gen::uniform_int(rng, 2, 8));
    ASSERT_EQ(lcs_length<std::string>(a, b), oracle::lcs_dp(a, b));
    const double r = rouge_l_words(a, b);
    ASSERT_NEAR(r, oracle::rouge_f_dp(a, b), 1e-12);
    ASSERT_GE(r, 0.0);
    ASSERT_LE(r, 1.0);
    ASSERT_NEAR(r, rouge_l_words(b, a), 1e-12);
  }
}

TEST(RougeLProperty, IntegerSymbolsAndLongSequences) {
  gen::Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> a(static_cast<std::size_t>(gen::uniform_int(rng, 0, 700)));
    std::vector<int> b(static_cast<std::size_t>(gen::uniform_int(rng, 0, 700)));
    for (auto& x : a) x = gen::uniform_int(rng, 0, 5);
    for (auto& x : b) x = gen::uniform_int(rng, 0, 5);
    ASSERT_EQ(lcs_length<int>(a, b), oracle::lcs_dp(a, b));
  }
}

TEST(GeoProb, Examples) {
  const std::vector<double> halves{std::log(0.5), std::log(0.5)};
  EXPECT_NEAR(geo_prob(halves), 0.5, 1e-12);
  const std::vector<double> mixed{std::log(0.25), 0.0};
  EXPECT_NEAR(geo_prob(mixed), 0.5, 1e-12);
  EXPECT_THROW(geo_prob(std::vector<double>{}), InvalidInputError);
  EXPECT_THROW(geo_prob(std::vector<double>{0.1}), InvalidInputError);
}

TEST(LengthNorm, RelativeToLongest) {
  std::vector<CandidateResponse> cs{cand("a b c d", {-0.1}), cand("a b", {-0.1}), cand("", {-0.1})};
  EXPECT_EQ(length_norm(cs), (std::vector<double>{1.0, 0.5, 0.0}));
  std::vector<CandidateResponse> empty{cand("", {-0.1})};
  EXPECT_EQ(length_norm(empty), (std::vector<double>{1.0}));
}

TEST(Confidence, WorkedExample) {
  // geo 0.5, norm 1, ROUGE 2/3 -> 0.4*0.5 + 0.2*1 + 0.4*2/3.
  auto c = cand("a b c d", std::vector<double>(4, std::log(0.5)));
  auto parts = confidence_parts(c, "a b", 1.0, {});
  EXPECT_NEAR(parts.geo_prob, 0.5, 1e-12);
  EXPECT_NEAR(parts.rouge, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(parts.confidence, 0.2 + 0.2 + 0.4 * 2.0 / 3.0, 1e-12);
  EXPECT_FALSE(parts.degraded);
}

TEST(Confidence, MissingLogprobsRedistributeWeight) {
  auto c = cand("a b c d", {});
  c.has_logprobs = false;
  auto parts = confidence_parts(c, "a b", 0.5, {});
  EXPECT_TRUE(parts.degraded);
  // alpha2' = 0.2/0.6, rouge weight 2/3.
  EXPECT_NEAR(parts.confidence, 0.5 / 3.0 + (2.0 / 3.0) * (2.0 / 3.0), 1e-12);
}

TEST(Confidence, WeightValidation) {
  auto c = cand("a", {-0.1});
  EXPECT_THROW(confidence_parts(c, "a", 1.0, {0.7, 0.5}), InvalidInputError);
  EXPECT_THROW(confidence_parts(c, "a", 1.0, {-0.1, 0.5}), InvalidInputError);
  EXPECT_NO_THROW(confidence_parts(c, "a", 1.0, {1.0, 0.0}));
}

TEST(SelectBest, PicksHighestConfidence) {
  const std::string sketch = "river forest light";
  std::vector<CandidateResponse> cs{
      cand("river forest light water", std::vector<double>(4, std::log(0.6)), "a"),
      cand("river city light water", std::vector<double>(4, std::log(0.9)), "b"),
      cand("market price", std::vector<double>(2, std::log(0.95)), "c")};
  auto expected = oracle_confidences(cs, sketch, 0.4, 0.2);
  auto report = score_candidates(cs, sketch, {});
  for (std::size_t i = 0; i < cs.size(); ++i) EXPECT_NEAR(report.parts[i].confidence, expected[i], 1e-12);
  const auto best = static_cast<std::size_t>(std::max_element(expected.begin(), expected.end()) - expected.begin());
  EXPECT_EQ(report.winner, best);
  EXPECT_EQ(&select_best(cs, sketch, {}), &cs[best]);
}

TEST(SelectBest, TiesGoToLongerThenSmallerModelId) {
  std::vector<CandidateResponse> same{cand("a b", {-0.1}, "z"), cand("a b", {-0.1}, "b")};
  EXPECT_EQ(select_best(same, "a b", {}).model_id, "b");
  // Probability-only weighting makes both equal; the longer one wins.
  std::vector<CandidateResponse> lens{cand("a b", {-0.1}, "a"), cand("a b c", {-0.1}, "b")};
  EXPECT_EQ(score_candidates(lens, "a", {1.0, 0.0}).winner, 1u);
  EXPECT_THROW(select_best(std::vector<CandidateResponse>{}, "a", {}), InvalidInputError);
}

TEST(SelectBestProperty, MatchesOracleAndIsPermutationInvariant) {
  gen::Rng rng(42);
  for (int t = 0; t < 1500; ++t) {
    const auto sketch = gen::join(gen::words(rng, 12, 6));
    std::vector<CandidateResponse> cs;
    const int n = gen::uniform_int(rng, 1, 6);
    for (int i = 0; i < n; ++i) {
      auto w = gen::words(rng, 20, 6);
      if (w.empty()) w.push_back("w0");
      std::vector<double> lps(w.size());
      for (auto& lp : lps) lp = -gen::uniform(rng, 0.0, 2.0);
      cs.push_back(cand(gen::join(w), lps, "m" + std::to_string(i)));
    }
    const double a1 = gen::uniform(rng, 0, 1), a2 = gen::uniform(rng, 0, 1 - a1);
    auto expected = oracle_confidences(cs, sketch, a1, a2);
    auto report = score_candidates(cs, sketch, {a1, a2});
    for (int i = 0; i < n; ++i) ASSERT_NEAR(report.parts[static_cast<std::size_t>(i)].confidence, expected[static_cast<std::size_t>(i)], 1e-9);
    const double top = *std::max_element(expected.begin(), expected.end());
    ASSERT_GE(expected[report.winner], top - 1e-9);

    auto shuffled = cs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto& w1 = select_best(cs, sketch, {a1, a2});
    const auto& w2 = select_best(shuffled, sketch, {a1, a2});
    ASSERT_EQ(w1.model_id, w2.model_id);
    ASSERT_EQ(w1.text, w2.text);
  }
}

TEST(ConfidenceProperty, MonotoneInEachTerm) {
  gen::Rng rng(43);
  for (int t = 0; t < 1000; ++t) {
    auto w = gen::words(rng, 15, 5);
    if (w.empty()) w.push_back("w0");
    std::vector<double> lps(w.size());
    for (auto& lp : lps) lp = -gen::uniform(rng, 0.1, 2.0);
    auto c = cand(gen::join(w), lps);
    const auto sketch = gen::join(gen::words(rng, 10, 5));
    const ConfidenceWeights cw{0.4, 0.2};
    const double base = confidence_parts(c, sketch, 0.5, cw).confidence;
    ASSERT_GE(confidence_parts(c, sketch, 0.9, cw).confidence, base);
    auto better = c;
    for (auto& lp : better.token_logprobs) lp *= 0.5;
    ASSERT_GE(confidence_parts(better, sketch, 0.5, cw).confidence, base);
  }
}

TEST(ScoringReport, JsonShape) {
  std::vector<CandidateResponse> cs{cand("a b", {-0.1, -0.2}, "x")};
  auto j = to_json(score_candidates(cs, "a b", {}));
  EXPECT_EQ(j["winner"], 0);
  EXPECT_EQ(j["candidates"][0]["model_id"], "x");
  EXPECT_DOUBLE_EQ(j["candidates"][0]["norm"].get<double>(), 1.0);
}

TEST(Confidence, DefaultWeightsExample) {
  // geo 0.5, norm 1, ROUGE 0.6 -> 0.2 + 0.2 + 0.24.
  auto c = cand("a b c d e f g", std::vector<double>(7, std::log(0.5)));
  auto parts = confidence_parts(c, "a b c", 1.0, {});
  EXPECT_NEAR(parts.rouge, 0.6, 1e-12);
  EXPECT_NEAR(parts.confidence, 0.64, 1e-12);
}
