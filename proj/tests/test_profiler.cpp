#include <gtest/gtest.h>

#include <sstream>

#include "pice/dispatcher.hpp"
#include "pice/profiler.hpp"
#include "support.hpp"

using namespace pice;

namespace {

std::vector<MeasurementSample> on_line(double slope, double intercept, std::vector<Tokens> lens) {
  std::vector<MeasurementSample> out;
  for (auto l : lens) out.push_back({"m", "d", l, intercept + slope * static_cast<double>(l)});
  return out;
}

}  // namespace

TEST(FitLatencyModel, RecoversExactLine) {
  auto f = fit_latency_model(on_line(0.05, 1.0, {50, 100, 200, 400}));
  EXPECT_NEAR(f.base_overhead(), 1.0, 1e-9);
  EXPECT_NEAR(f.eval(100), 6.0, 1e-9);
  EXPECT_NEAR(f.eval(300), 16.0, 1e-9);
}

TEST(FitLatencyModel, TwoPointsThroughOrigin) {
  auto f = fit_latency_model({{"m", "d", 100, 5.0}, {"m", "d", 200, 10.0}});
  EXPECT_NEAR(f.base_overhead(), 0.0, 1e-12);
  EXPECT_NEAR(f.seconds_per_token(150), 0.05, 1e-12);
}

TEST(FitLatencyModel, AveragesDuplicatesBeforeFitting) {
  std::vector<MeasurementSample> s{{"m", "d", 100, 4.0}, {"m", "d", 100, 6.0},
                                   {"m", "d", 200, 9.0}, {"m", "d", 200, 11.0},
                                   {"m", "d", 200, 10.0}, {"m", "d", 300, 15.0}};
  auto f = fit_latency_model(s);
  // Per-length means 5, 10, 15 lie on 0.05 l exactly.
  EXPECT_NEAR(f.base_overhead(), 0.0, 1e-9);
  EXPECT_NEAR(f.eval(100), 5.0, 1e-9);
  EXPECT_NEAR(f.eval(200), 10.0, 1e-9);
}

TEST(FitLatencyModel, InsufficientData) {
  EXPECT_THROW(fit_latency_model({}), InsufficientDataError);
  EXPECT_THROW(fit_latency_model({{"m", "d", 100, 5.0}}), InsufficientDataError);
  EXPECT_THROW(fit_latency_model({{"m", "d", 100, 5.0}, {"m", "d", 100, 6.0}}), InsufficientDataError);
}

TEST(FitLatencyModel, RejectsMixedPairs) {
  EXPECT_THROW(fit_latency_model({{"m", "d", 100, 5.0}, {"x", "d", 200, 6.0}}), InvalidInputError);
}

TEST(FitLatencyModelProperty, OutputAlwaysValidUnderNoise) {
  gen::Rng rng(10);
  for (int t = 0; t < 500; ++t) {
    std::vector<MeasurementSample> s;
    const int n = gen::uniform_int(rng, 2, 20);
    for (int i = 0; i < n; ++i) {
      s.push_back({"m", "d", gen::uniform_int(rng, 1, 2000), gen::uniform(rng, 0.01, 60.0)});
    }
    s.push_back({"m", "d", 2001, gen::uniform(rng, 0.01, 60.0)});
    auto f = fit_latency_model(s);  // constructor validates invariants
    ASSERT_GE(f.base_overhead(), 0.0);
    for (std::size_t i = 1; i < f.samples().size(); ++i) {
      ASSERT_GE(f.samples()[i].latency, f.samples()[i - 1].latency);
    }
  }
}

TEST(FitLatencyModelProperty, ReproducesNoiseFreeModel) {
  gen::Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    const double rate = gen::uniform(rng, 5, 80), base = gen::uniform(rng, 0, 2);
    auto truth = LatencyModel::constant_rate(rate, base, 2000);
    std::vector<MeasurementSample> s;
    for (Tokens l : {50, 100, 250, 500, 1000, 2000}) {
      s.push_back({"m", "d", l, truth.eval(static_cast<double>(l))});
    }
    auto f = fit_latency_model(s);
    for (const auto& x : s) {
      ASSERT_NEAR(f.eval(static_cast<double>(x.output_length)), x.wall_time, 1e-9 * x.wall_time);
    }
    ASSERT_NEAR(1.0 / f.seconds_per_token(1000), rate, 1e-6);
  }
}

TEST(FitLatencyModels, GroupsByModelAndDevice) {
  auto a = on_line(0.05, 0.0, {100, 200});
  std::vector<MeasurementSample> s = a;
  s.push_back({"m", "e", 100, 20.0});
  s.push_back({"m", "e", 200, 40.0});
  auto models = fit_latency_models(s);
  ASSERT_EQ(models.size(), 2u);
  EXPECT_NEAR(models.at({"m", "e"}).eval(100), 20.0, 1e-9);
}

TEST(EstimateCostCoefficient, ConstantRatio) {
  auto cloud = LatencyModel::constant_rate(20);
  auto edge = LatencyModel::constant_rate(5);
  EXPECT_NEAR(estimate_cost_coefficient(cloud, edge, {100, 200, 400}).value(), 4.0, 1e-12);
}

TEST(EstimateCostCoefficient, MedianOfRatios) {
  // Cloud takes 1 s at every probe; the edge ratios are 3.8, 4.0 and 4.4.
  LatencyModel cloud({{100, 1.0}, {200, 1.0}, {300, 1.0}}, 0.0);
  LatencyModel edge({{100, 3.8}, {200, 4.0}, {300, 4.4}}, 0.0);
  EXPECT_NEAR(estimate_cost_coefficient(cloud, edge, {300, 100, 200}).value(), 4.0, 1e-12);
  // An even probe count averages the middle pair.
  EXPECT_NEAR(estimate_cost_coefficient(cloud, edge, {100, 200, 300, 300}).value(), 4.2, 1e-12);
}

TEST(EstimateCostCoefficient, FasterEdgeAllowed) {
  auto cloud = LatencyModel::constant_rate(10);
  auto edge = LatencyModel::constant_rate(40);
  EXPECT_NEAR(estimate_cost_coefficient(cloud, edge, {100}).value(), 0.25, 1e-12);
}

TEST(EstimateCostCoefficient, Errors) {
  auto m = LatencyModel::constant_rate(10);
  EXPECT_THROW(estimate_cost_coefficient(m, m, {}), InvalidInputError);
  EXPECT_THROW(estimate_cost_coefficient(m, m, {0.0}), DivisionError);
}

TEST(EstimateCostCoefficientProperty, ProbeOrderInvariant) {
  gen::Rng rng(12);
  for (int t = 0; t < 300; ++t) {
    auto cloud = gen::latency_model(rng);
    auto edge = gen::latency_model(rng);
    std::vector<double> probes;
    for (int i = gen::uniform_int(rng, 1, 9); i > 0; --i) probes.push_back(gen::uniform_int(rng, 1, 2000));
    const double a = estimate_cost_coefficient(cloud, edge, probes).value();
    std::shuffle(probes.begin(), probes.end(), rng);
    ASSERT_EQ(a, estimate_cost_coefficient(cloud, edge, probes).value());
  }
}

namespace {
struct FakeWorld {
  BucketedQueue queue;
  int busy = 0;
  double rtt = 0.02;
  double t = 0.0;
  std::vector<Tokens> queue_token_load() const { return queue.queue_token_load(); }
  int busy_device_count() const { return busy; }
  double observed_rtt() const { return rtt; }
  double now() const { return t; }
};

Job job(std::string id, Tokens l) {
  Job j;
  j.query_id = std::move(id);
  j.expected_len = l;
  j.sentences = {"x."};
  return j;
}
}  // namespace

TEST(Snapshot, EmptySystem) {
  FakeWorld w;
  auto s = snapshot(w);
  EXPECT_TRUE(s.queue_lengths.empty());
  EXPECT_EQ(s.busy_devices, 0);
  EXPECT_DOUBLE_EQ(s.observed_rtt, 0.02);
}

TEST(Snapshot, MirrorsQueue) {
  FakeWorld w;
  w.queue.enqueue(job("a", 200));
  w.queue.enqueue(job("b", 300));
  w.busy = 2;
  w.t = 7.5;
  auto s = snapshot(w);
  EXPECT_EQ(s.queue_lengths, (std::vector<Tokens>{200, 300}));
  EXPECT_EQ(s.busy_devices, 2);
  EXPECT_DOUBLE_EQ(s.timestamp, 7.5);
}

TEST(ReadMeasurements, ParsesJsonLines) {
  std::istringstream in(
      "{\"model_id\":\"m\",\"device_id\":\"d\",\"output_length\":100,\"wall_time_s\":5.0}\n"
      "\n"
      "{\"model_id\":\"m\",\"device_id\":\"d\",\"output_length\":200,\"wall_time_s\":10.0}\n");
  auto s = read_measurements(in);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].output_length, 200);
  EXPECT_DOUBLE_EQ(s[1].wall_time, 10.0);
}

TEST(ReadMeasurements, ReportsBadLine) {
  std::istringstream in("{\"model_id\":\"m\"}\n");
  EXPECT_THROW(read_measurements(in), InvalidInputError);
}
