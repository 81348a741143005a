#include <cmath>
#include <set>

#include "capassign/scenarios.hpp"
#include "test_util.hpp"

using namespace capassign;

TEST(SplitMix64, ReferenceSequence) {
  // Published reference values for seed 1234567.
  SplitMix64 rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ULL);
  EXPECT_EQ(rng.next(), 3203168211198807973ULL);
  EXPECT_EQ(rng.next(), 9817491932198370423ULL);
}

TEST(SplitMix64, DerivedSeedsAreSequenceOutputs) {
  SplitMix64 rng(42);
  for (std::uint64_t k = 0; k < 5; ++k) EXPECT_EQ(derive_seed(42, k), rng.next());
}

TEST(SplitMix64, BelowStaysInRange) {
  SplitMix64 rng(9);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(Scenarios, GenerationIsDeterministicAndInBounds) {
  const ScenarioSpec spec = ScenarioSpec::defaults(World::DoubleIntegrator, 6, 77);
  const Scenario a = generate(spec);
  const Scenario b = generate(spec);
  for (Index i = 0; i < 6; ++i) {
    EXPECT_EQ(a.engagement.initial.agent_states[i], b.engagement.initial.agent_states[i]);
    const Vector& x = a.engagement.initial.agent_states[i];
    EXPECT_LE(x.head(3).cwiseAbs().maxCoeff(), 1000.0);
    EXPECT_LE(x.tail(3).cwiseAbs().maxCoeff(), 5000.0);
    const Vector& y = a.engagement.initial.target_states[i];
    EXPECT_LE(y.tail(3).cwiseAbs().maxCoeff(), 1000.0);
  }
  const std::set<Index> locations(a.target_location.begin(), a.target_location.end());
  EXPECT_EQ(locations.size(), 6u);
  EXPECT_NE(generate(ScenarioSpec::defaults(World::DoubleIntegrator, 6, 78))
                .engagement.initial.agent_states[0],
            a.engagement.initial.agent_states[0]);
}

TEST(Scenarios, TargetsSettleAtTheirLocations) {
  const Scenario sc = generate(ScenarioSpec::defaults(World::DoubleIntegrator, 3, 5));
  for (Index j = 0; j < 3; ++j) {
    const LinearSystem& t = sc.engagement.target_dynamics[j];
    // Fixed point of y' = A y + c.
    const Vector fixed = t.drift().fullPivLu().solve(-t.offset());
    const Vector& loc = sc.terminal_locations[sc.target_location[j]];
    EXPECT_LT((fixed.head(3) - loc).norm(), 1e-6);
  }
}

TEST(Scenarios, ParseWorld) {
  EXPECT_EQ(parse_world("quadcopter"), World::Quadcopter);
  EXPECT_EQ(parse_world("double-integrator"), World::DoubleIntegrator);
  EXPECT_ERROR_CODE(parse_world("blimp"), ErrorCode::InvalidParameter);
}

TEST(Scenarios, ValidationNamesProblems) {
  ScenarioSpec spec = ScenarioSpec::defaults(World::DoubleIntegrator, 3, 1);
  spec.agent_bounds.pop_back();
  EXPECT_ERROR_CODE(spec.validate(), ErrorCode::InvalidParameter);
}

TEST(MonteCarlo, ResultIndependentOfJobCount) {
  const ScenarioSpec spec = ScenarioSpec::defaults(World::DoubleIntegrator, 3, 11);
  const auto cfg = default_engagement_config(World::DoubleIntegrator);
  const MonteCarloReport one = monte_carlo(spec, cfg, 6, 1, 4);
  const MonteCarloReport three = monte_carlo(spec, cfg, 6, 3, 4);
  ASSERT_EQ(one.runs.size(), three.runs.size());
  for (std::size_t k = 0; k < one.runs.size(); ++k) {
    EXPECT_EQ(one.runs[k].seed, three.runs[k].seed);
    EXPECT_EQ(one.runs[k].j_dyn, three.runs[k].j_dyn);
    EXPECT_EQ(one.runs[k].j_emd, three.runs[k].j_emd);
  }
  EXPECT_EQ(one.aggregates.mean_gap, three.aggregates.mean_gap);
  EXPECT_EQ(one.gap_histogram.counts, three.gap_histogram.counts);
}

TEST(MonteCarlo, AggregatesAndHistogram) {
  std::vector<RunRecord> runs(4);
  const double dyn[] = {10, 20, 30, 40}, emd[] = {11, 22, 33, 44};
  for (int k = 0; k < 4; ++k) {
    runs[k].ok = true;
    runs[k].j_dyn = dyn[k];
    runs[k].j_emd = emd[k];
    runs[k].dyn_status = runs[k].emd_status = TerminalStatus::Completed;
    runs[k].emd_switches = k;
  }
  runs[3].ok = false;
  const Aggregates a = aggregate(runs);
  EXPECT_EQ(a.succeeded, 3);
  EXPECT_EQ(a.failed, 1);
  EXPECT_NEAR(a.mean_gap, 2.0, 1e-12);
  EXPECT_NEAR(a.stddev_gap, 1.0, 1e-12);
  EXPECT_NEAR(a.mean_switches, 1.0, 1e-12);
  EXPECT_FALSE(a.reliable);

  const Histogram h = make_histogram({0, 1, 2, 3, 4}, 2);
  EXPECT_EQ(h.edges.size(), 3u);
  EXPECT_EQ(h.counts, (std::vector<Index>{2, 3}));
}

TEST(MonteCarlo, FailuresAreRecordedNotThrown) {
  ScenarioSpec spec = ScenarioSpec::defaults(World::DoubleIntegrator, 2, 3);
  EngagementConfig cfg = default_engagement_config(World::DoubleIntegrator);
  cfg.integrator.max_step = 1e-30;  // forces step-size underflow
  const RunRecord r = run_pair(spec, cfg, 0);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.failure.empty());
}
