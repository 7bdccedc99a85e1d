#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pice/finetune.hpp"
#include "support.hpp"

using namespace pice;

TEST(SketchScore, Examples) {
  // Four words under beta1 = 4 contribute exactly 1; unrelated expansion adds 0.
  EXPECT_DOUBLE_EQ(sketch_score("a b c d", "x y", "p q", {}), 1.0);
  EXPECT_DOUBLE_EQ(sketch_score("a b c d", "p q", "p q", {}), 2.0);
  EXPECT_NEAR(sketch_score("a b", "the cat ran", "the cat sat", {1.0, 3.0}), 0.5 + 2.0, 1e-12);
  EXPECT_THROW(sketch_score("", "a", "a", {}), InvalidInputError);
  EXPECT_THROW(sketch_score("a", "a", "a", {0.0, 0.0}), ConfigError);
  EXPECT_THROW(sketch_score("a", "a", "a", {-1.0, 1.0}), ConfigError);
}

TEST(LabelPair, HigherScoreWins) {
  SketchPair p{"q", "a b c d", "a b", "x y", "p q", "p q"};
  auto t = label_pair(p, {});
  EXPECT_EQ(t.winner_sketch, "a b");  // 2 + 1 beats 1 + 0
  EXPECT_EQ(t.loser_sketch, "a b c d");
  EXPECT_DOUBLE_EQ(t.winner_score, 3.0);
  EXPECT_DOUBLE_EQ(t.loser_score, 1.0);
}

TEST(LabelPair, TiesPreferShorterThenFirst) {
  // beta1 = 0: both expansions score ROUGE 1.
  SketchPair p{"q", "a b c", "a b", "r", "r", "r"};
  EXPECT_EQ(label_pair(p, {0.0, 1.0}).winner_sketch, "a b");
  SketchPair same{"q", "x y", "z w", "r", "r", "r"};
  EXPECT_EQ(label_pair(same, {}).winner_sketch, "x y");
}

TEST(LabelPairProperty, WinnerScoreNeverBelowLoser) {
  gen::Rng rng(50);
  for (int t = 0; t < 2000; ++t) {
    auto nonempty = [&] {
      auto w = gen::words(rng, 10, 5);
      if (w.empty()) w.push_back("a");
      return gen::join(w);
    };
    SketchPair p{"q", nonempty(), nonempty(), nonempty(), nonempty(), nonempty()};
    PreferenceWeights w{gen::uniform(rng, 0.01, 5), gen::uniform(rng, 0, 5)};
    auto tr = label_pair(p, w);
    ASSERT_GE(tr.winner_score, tr.loser_score);
    ASSERT_TRUE((tr.winner_sketch == p.sketch_a && tr.loser_sketch == p.sketch_b) ||
                (tr.winner_sketch == p.sketch_b && tr.loser_sketch == p.sketch_a));
  }
}

TEST(PairwiseLoss, Examples) {
  EXPECT_NEAR(rm_pairwise_loss(1.0, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(rm_pairwise_loss(20.0, 0.0), std::log1p(std::exp(-20.0)), 1e-18);
  EXPECT_NEAR(rm_pairwise_loss(0.0, 20.0), 20.0 + std::log1p(std::exp(-20.0)), 1e-12);
  // Large gaps stay finite.
  EXPECT_NEAR(rm_pairwise_loss(-1000.0, 1000.0), 2000.0, 1e-9);
  EXPECT_EQ(rm_pairwise_loss(1000.0, -1000.0), 0.0);
  EXPECT_THROW(rm_pairwise_loss(NAN, 0.0), InvalidInputError);
  EXPECT_THROW(rm_pairwise_loss(INFINITY, 0.0), InvalidInputError);
}

TEST(PairwiseLossProperty, MatchesNaiveFormAndDecreasesInMargin) {
  gen::Rng rng(51);
  for (int t = 0; t < 5000; ++t) {
    const double a = gen::uniform(rng, -30, 30), b = gen::uniform(rng, -30, 30);
    const double naive = -std::log(1.0 / (1.0 + std::exp(-(a - b))));
    ASSERT_NEAR(rm_pairwise_loss(a, b), naive, 1e-9 * std::max(1.0, naive));
    ASSERT_GT(rm_pairwise_loss(a, b), 0.0);
    ASSERT_GE(rm_pairwise_loss(a, b), rm_pairwise_loss(a + 0.5, b));
  }
}

TEST(KlDivergence, Examples) {
  // Textbook case: binomial(2, 0.4) against uniform over three outcomes.
  const std::vector<double> p{0.36, 0.48, 0.16}, q{1.0 / 3, 1.0 / 3, 1.0 / 3};
  EXPECT_NEAR(kl_divergence(p, q), 0.0852996, 1e-7);
  EXPECT_NEAR(kl_divergence(q, p), 0.097455, 1e-6);
  EXPECT_DOUBLE_EQ(kl_divergence(q, q), 0.0);
  const std::vector<double> zero_mass{0.5, 0.5, 0.0};
  EXPECT_NEAR(kl_divergence(zero_mass, q), std::log(1.5), 1e-12);
  EXPECT_THROW(kl_divergence(q, zero_mass), DivergenceUndefinedError);
  EXPECT_THROW(kl_divergence(std::vector<double>{0.5, 0.6}, std::vector<double>{0.5, 0.5}), InvalidInputError);
  EXPECT_THROW(kl_divergence(p, std::vector<double>{0.5, 0.5}), InvalidInputError);
}

TEST(KlDivergenceProperty, NonNegativeAndZeroOnlyAtEquality) {
  gen::Rng rng(52);
  auto dist = [&](std::size_t n) {
    std::vector<double> d(n);
    double s = 0;
    for (auto& x : d) s += (x = gen::uniform(rng, 0.01, 1.0));
    for (auto& x : d) x /= s;
    return d;
  };
  for (int t = 0; t < 2000; ++t) {
    const auto n = static_cast<std::size_t>(gen::uniform_int(rng, 1, 10));
    auto p = dist(n), q = dist(n);
    const double kl = kl_divergence(p, q);
    ASSERT_GE(kl, -1e-15);
    ASSERT_NEAR(kl_divergence(p, p), 0.0, 1e-15);
    // Gibbs: KL(p||q) >= 0.5 * L1(p, q)^2 (Pinsker).
    double l1 = 0;
    for (std::size_t i = 0; i < n; ++i) l1 += std::abs(p[i] - q[i]);
    ASSERT_GE(kl + 1e-12, 0.5 * l1 * l1);
  }
}

TEST(KlObjective, BlendsRewardAndPenalty) {
  const std::vector<double> p{0.36, 0.48, 0.16}, q{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const double kl = kl_divergence(p, q);
  EXPECT_NEAR(kl_regularized_objective(2.0, p, q, 0.25), 0.75 * 2.0 - 0.25 * kl, 1e-12);
  EXPECT_DOUBLE_EQ(kl_regularized_objective(2.0, p, q, 0.0), 2.0);
  EXPECT_NEAR(kl_regularized_objective(2.0, p, q, 1.0), -kl, 1e-15);
  EXPECT_THROW(kl_regularized_objective(2.0, p, q, 1.5), InvalidInputError);
}

TEST(Triplets, JsonIo) {
  auto pair = sketch_pair_from_json(nlohmann::json::parse(
      R"({"input":"q","sketch_a":"a b","sketch_b":"a b c d","full_answer_a":"x","full_answer_b":"x","reference":"x"})"));
  EXPECT_EQ(pair.reference_answer, "x");
  std::vector<PreferenceTriplet> ts{label_pair(pair, {})};
  std::ostringstream os;
  write_triplets(os, ts);
  auto j = nlohmann::json::parse(os.str());
  EXPECT_EQ(j["winner"], "a b");
  EXPECT_EQ(j["loser"], "a b c d");
  EXPECT_DOUBLE_EQ(j["winner_score"].get<double>(), 3.0);
  EXPECT_THROW(sketch_pair_from_json(nlohmann::json{{"input", "q"}}), InvalidInputError);
  EXPECT_THROW(sketch_pair_from_json(nlohmann::json::parse(
                   R"({"input":"q","sketch_a":" ","sketch_b":"a","full_answer_a":"x","full_answer_b":"x","reference":"x"})")),
               InvalidInputError);
}

TEST(KlObjective, TwoPointExample) {
  const std::vector<double> p{0.75, 0.25}, q{0.5, 0.5};
  EXPECT_NEAR(kl_divergence(p, q), 0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-15);
  EXPECT_NEAR(kl_regularized_objective(1.0, p, q, 0.5), 0.4346, 5e-4);
}
