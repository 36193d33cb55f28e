#include <cmath>

#include <gtest/gtest.h>

#include "perr/edt.hpp"
#include "perr/errors.hpp"
#include "perr/simulation.hpp"
#include "support.hpp"

namespace perr {
namespace {

using test::person;

TEST(Shift, ThetaBelowOneDelaysIndex) {
  const std::vector<double> ev{100};
  EXPECT_DOUBLE_EQ(shift_index_time(110, ev, 0.5, 10), 115);
}

TEST(Shift, ThetaAboveOneUsesLatestPrecedingEvent) {
  const std::vector<double> ev{50, 60};
  EXPECT_DOUBLE_EQ(shift_index_time(100, ev, 2, 10), 90);
}

TEST(Shift, ThetaBelowOneWalksEveryPrecedingEvent) {
  const std::vector<double> ev{50, 102};
  EXPECT_DOUBLE_EQ(shift_index_time(100, ev, 0.5, 10), 108);
}

TEST(Shift, WithinWindowBranch) {
  // Event 95, theta 2, delta 10: 95 + 20 > 100, so B moves to 95 + (100-95)/2.
  const std::vector<double> ev{95};
  EXPECT_DOUBLE_EQ(shift_index_time(100, ev, 2, 10), 97.5);
}

TEST(Shift, NoPrecedingEventMeansNoShift) {
  const std::vector<double> ev{120};
  EXPECT_EQ(shift_index_time(100, ev, 4, 10), 100);
  EXPECT_EQ(shift_index_time(100, ev, 0.25, 10), 100);
}

TEST(Shift, Properties) {
  Rng rng(31);
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> ev;
    double t = 0.0;
    for (int j = 0; j < 6; ++j) {
      t += rng.uniform(0.5, 40);
      ev.push_back(t);
    }
    const double b = rng.uniform(1, 200);
    const double delta = rng.uniform(0, 40);
    EXPECT_EQ(shift_index_time(b, ev, 1.0, delta), b);
    EXPECT_EQ(shift_index_time(b, ev, rng.uniform(0.1, 5), 0.0), b);

    const auto first_after = std::lower_bound(ev.begin(), ev.end(), b);
    const bool has_prior = first_after != ev.begin();
    const double up = shift_index_time(b, ev, rng.uniform(1.01, 6), delta);
    EXPECT_LE(up, b);
    if (has_prior) EXPECT_GT(up, *std::prev(first_after));

    const double down = shift_index_time(b, ev, rng.uniform(0.1, 0.99), delta);
    EXPECT_GE(down, b);
    if (has_prior && delta > 0) EXPECT_GT(down, b);
  }
}

EdtProfile profile_with(std::vector<double> z, std::vector<bool> estimable = {}) {
  EdtProfile p;
  p.gaps = static_cast<int>(z.size());
  p.gap_width = 10;
  for (std::size_t m = 0; m < z.size(); ++m) {
    GapEstimate g;
    g.gap = static_cast<int>(m) + 1;
    g.estimable = estimable.empty() ? true : estimable[m];
    g.z = z[m];
    g.se = 0.3;
    g.estimate = z[m] * g.se;
    p.per_gap.push_back(g);
  }
  return p;
}

TEST(DecideDelta, TrailingRunOfTwo) {
  const auto d = decide_delta(profile_with({0.1, -0.5, 1.0, 2.5, 3.1}));
  EXPECT_TRUE(d.detected);
  EXPECT_EQ(d.delta_hat, 20);
}

TEST(DecideDelta, RunIsBrokenByGapThree) {
  const auto d = decide_delta(profile_with({2.4, 0.3, 1.2, -2.5, -3.0}));
  EXPECT_TRUE(d.detected);
  EXPECT_EQ(d.delta_hat, 20);
}

TEST(DecideDelta, LastGapNotSignificant) {
  const auto d = decide_delta(profile_with({3, 3, 3, 3, 1.0}));
  EXPECT_FALSE(d.detected);
  EXPECT_EQ(d.delta_hat, 0);
}

TEST(DecideDelta, InestimableCountsAsNotSignificant) {
  const auto d = decide_delta(profile_with({0, 0, 5, 5, 5}, {true, true, true, false, true}));
  EXPECT_TRUE(d.detected);
  EXPECT_EQ(d.delta_hat, 10);
}

TEST(DecideDelta, OnlyTheSignificancePatternMatters) {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> a(5), b(5);
    for (int m = 0; m < 5; ++m) {
      const bool sig = rng.bernoulli(0.5);
      const double sign = rng.bernoulli(0.5) ? 1 : -1;
      a[m] = sign * (sig ? rng.uniform(1.96, 9) : rng.uniform(0, 1.95));
      b[m] = -sign * (sig ? rng.uniform(1.96, 9) : rng.uniform(0, 1.95));
    }
    const auto da = decide_delta(profile_with(a)), db = decide_delta(profile_with(b));
    EXPECT_EQ(da.detected, db.detected);
    EXPECT_EQ(da.delta_hat, db.delta_hat);
  }
}

CohortDataset one_pair(std::vector<double> control_events, double control_end = 200) {
  CohortDataset ds;
  ds.matched = true;
  ds.participants.push_back(person("t", Group::treated, "p", 0, 100, 200, {95}));
  ds.participants.push_back(person("c", Group::control, "p", 0, 100, control_end, std::move(control_events)));
  return ds;
}

EdtDecision decision(double delta, double theta) {
  EdtDecision d;
  d.detected = true;
  d.delta_hat = delta;
  d.theta_hat = theta;
  return d;
}

TEST(ControlStar, ThetaTwoExample) {
  const auto star = build_control_star(one_pair({50, 60}), decision(10, 2));
  const auto& c = star.dataset.participants.at(1);
  EXPECT_EQ(c.index_time, 90);
  EXPECT_EQ(prior_events(c).size(), 2u);
  EXPECT_EQ(star.dataset.participants.at(0).index_time, 100);
}

TEST(ControlStar, ThetaHalfExampleMovesEventIntoPrior) {
  const auto star = build_control_star(one_pair({50, 102}), decision(10, 0.5));
  const auto& c = star.dataset.participants.at(1);
  EXPECT_EQ(c.index_time, 108);
  EXPECT_EQ(prior_events(c).size(), 2u);
  EXPECT_TRUE(post_events(c).empty());
}

TEST(ControlStar, ShiftPastEndDropsThePair) {
  CohortDataset ds = one_pair({50, 102}, 105);
  ds.participants.push_back(person("t2", Group::treated, "q", 0, 100, 200));
  ds.participants.push_back(person("c2", Group::control, "q", 0, 100, 200));
  const auto star = build_control_star(ds, decision(10, 0.5));
  EXPECT_EQ(star.dropped_pairs, (std::vector<std::string>{"p"}));
  ASSERT_EQ(star.dataset.participants.size(), 2u);
  EXPECT_EQ(star.dataset.participants[0].id, "t2");
  EXPECT_TRUE(validate(star.dataset).empty());
}

TEST(ControlStar, AllPairsDroppedIsAnError) {
  EXPECT_THROW(build_control_star(one_pair({50, 102}, 105), decision(10, 0.5)), DataError);
}

TEST(ControlStar, TreatedAreNeverTouched) {
  ScenarioSpec spec;
  spec.n_prematch = 600;
  const CohortDataset ds = assemble_matched_cohort(spec, 4).dataset;
  for (double theta : {0.25, 4.0}) {
    const auto star = build_control_star(ds, decision(30, theta));
    std::map<std::string, const Participant*> orig;
    for (const auto& p : ds.participants) orig[p.id] = &p;
    std::map<std::string, int> per_pair;
    for (const auto& p : star.dataset.participants) {
      ++per_pair[p.pair_id];
      if (p.is_treated()) {
        EXPECT_EQ(p.index_time, orig.at(p.id)->index_time);
        EXPECT_EQ(p.event_times, orig.at(p.id)->event_times);
      }
    }
    for (const auto& [pair, n] : per_pair) EXPECT_EQ(n, 2) << pair;
  }
}

ScenarioSpec edt_spec(double delta, double theta) {
  ScenarioSpec s;
  s.delta = delta;
  s.theta = theta;
  return s;
}

TEST(MultiGap, ProfileShapeAndZValues) {
  const CohortDataset ds = assemble_matched_cohort(edt_spec(20, 4), 5).dataset;
  const EdtProfile p = fit_multi_gap(ds, 5, 10);
  ASSERT_EQ(p.per_gap.size(), 5u);
  for (int m = 0; m < 5; ++m) {
    const auto& g = p.per_gap[static_cast<std::size_t>(m)];
    EXPECT_EQ(g.gap, m + 1);
    EXPECT_EQ(g.to, -10.0 * (4 - m));
    EXPECT_EQ(g.from, g.to - 10.0);
    ASSERT_TRUE(g.estimable);
    EXPECT_NEAR(g.z, g.estimate / g.se, 1e-12);
  }
  EXPECT_GT(p.per_gap[4].z, kSignificanceZ);
}

TEST(MultiGap, EmptySubPeriodIsInestimableNotFatal) {
  CohortDataset ds;
  ds.matched = true;
  for (int i = 0; i < 40; ++i) {
    const std::string pid = "t" + std::to_string(i);
    std::vector<double> ev{static_cast<double>(10 + i % 20), 95.0 + (i % 4)};
    ds.participants.push_back(person(pid, Group::treated, pid, 0, 100, 200, ev));
    ds.participants.push_back(person("c" + std::to_string(i), Group::control, pid, 0, 100, 200,
                                     {static_cast<double>(12 + i % 25), 96.0 + (i % 3)}));
  }
  const EdtProfile p = fit_multi_gap(ds, 5, 10);
  ASSERT_EQ(p.per_gap.size(), 5u);
  EXPECT_FALSE(p.per_gap[1].estimable);  // (60, 70]: no events anywhere
  EXPECT_TRUE(p.per_gap[4].estimable);
}

TEST(Theta, NullDataWithForcedGapIsNearOne) {
  double sum = 0.0;
  const int n = 6;
  for (int s = 0; s < n; ++s) {
    const CohortDataset ds = assemble_matched_cohort(edt_spec(0, 1), 100 + s).dataset;
    sum += std::log(*estimate_theta(ds, 20).theta_hat);
  }
  EXPECT_NEAR(std::exp(sum / n), 1.0, 0.2);
}

TEST(Theta, StrongEffectIsRecovered) {
  const CohortDataset ds = assemble_matched_cohort(edt_spec(30, 4), 6).dataset;
  const EdtDecision d = estimate_theta(ds, 30);
  ASSERT_TRUE(d.theta_hat);
  EXPECT_NEAR(std::log(*d.theta_hat), std::log(4.0), 0.5);
  EXPECT_GT(d.theta_se_log, 0);
}

TEST(Pipeline, NotDetectedLeavesEstimateUnchanged) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const CohortDataset ds = assemble_matched_cohort(edt_spec(0, 1), 200 + s).dataset;
    const CorrectedPerr c = corrected_perr_ag(ds, 5, 10);
    if (c.decision.detected) continue;
    EXPECT_EQ(c.corrected.perr_hr, c.uncorrected.perr_hr);
    EXPECT_EQ(c.decision.delta_hat, 0);
    EXPECT_FALSE(c.decision.theta_hat.has_value());
    return;
  }
  FAIL() << "every null replicate detected EDT";
}

TEST(Pipeline, CorrectionMovesTowardTruth) {
  const CohortDataset ds = assemble_matched_cohort(edt_spec(30, 0.25), 7).dataset;
  const CorrectedPerr c = corrected_perr_ag(ds, 5, 10, {}, AnalysisWindow{});
  ASSERT_TRUE(c.decision.detected);
  EXPECT_LT(std::abs(std::log(c.corrected.perr_hr / 0.5)), std::abs(std::log(c.uncorrected.perr_hr / 0.5)));
}

}  // namespace
}  // namespace perr
