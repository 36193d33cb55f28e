#include <cmath>

#include <gtest/gtest.h>

#include "perr/perr_estimators.hpp"
#include "perr/simulation.hpp"
#include "support.hpp"

namespace perr {
namespace {

using test::person;

CohortDataset sim_cohort(std::uint64_t seed, double sigma = 0.0) {
  ScenarioSpec spec;
  spec.beta0 = -6.5;
  spec.sigma_omega_sq = sigma;
  spec.n_prematch = 1500;
  return assemble_matched_cohort(spec, seed).dataset;
}

void expect_consistent(const PerrEstimate& e) {
  EXPECT_NEAR(e.perr_hr / (e.hr_post / e.hr_prior), 1.0, 1e-12);
  EXPECT_LE(e.ci_low, e.perr_hr);
  EXPECT_GE(e.ci_high, e.perr_hr);
  EXPECT_GT(e.ci_low, 0.0);
  EXPECT_LE(e.prior_ci.low, e.hr_prior);
  EXPECT_GE(e.prior_ci.high, e.hr_prior);
}

TEST(Perr, RatioIdentityAndIntervalsForAllMethods) {
  const CohortDataset ds = sim_cohort(1);
  expect_consistent(perr_cox(ds));
  expect_consistent(perr_ag(ds));
  const PerrEstimate o = perr_original(ds, 40, 9);
  expect_consistent(o);
  ASSERT_TRUE(o.bootstrap.has_value());
  EXPECT_EQ(o.bootstrap->replicates, 40);
  EXPECT_EQ(o.seed.value(), 9u);
}

TEST(Perr, CountsDescribeTheDataset) {
  const CohortDataset ds = sim_cohort(2);
  const PerrEstimate e = perr_ag(ds);
  EXPECT_EQ(e.n_treated + e.n_control, ds.participants.size());
  EXPECT_EQ(e.n_treated, e.n_control);
  std::size_t prior = 0, post = 0;
  for (const auto& p : ds.participants) {
    prior += prior_events(p).size();
    post += post_events(p).size();
  }
  EXPECT_EQ(e.events_prior, prior);
  EXPECT_EQ(e.events_post, post);
}

TEST(Perr, RelabellingArmsInvertsEveryRatio) {
  const CohortDataset ds = sim_cohort(3);
  CohortDataset flipped = ds;
  for (auto& p : flipped.participants) p.group = p.is_treated() ? Group::control : Group::treated;
  for (auto method : {&perr_cox, &perr_ag}) {
    const PerrEstimate a = method(ds, {}), b = method(flipped, {});
    EXPECT_NEAR(std::log(a.hr_prior), -std::log(b.hr_prior), 1e-8);
    EXPECT_NEAR(std::log(a.hr_post), -std::log(b.hr_post), 1e-8);
    EXPECT_NEAR(std::log(a.perr_hr), -std::log(b.perr_hr), 1e-8);
    EXPECT_NEAR(a.se_log, b.se_log, 1e-8);
  }
  const auto pa = perr_original_point(ds), pb = perr_original_point(flipped);
  EXPECT_NEAR(pa.log_hr_prior, -pb.log_hr_prior, 1e-8);
  EXPECT_NEAR(pa.log_hr_post, -pb.log_hr_post, 1e-8);
}

TEST(Perr, AgIgnoresSplitsOfCensoredRows) {
  const CohortDataset ds = sim_cohort(4);
  const SurvivalFrame rows = build_all_event_rows(ds);
  SurvivalFrame split(rows.covariate_names());
  for (const auto& label : rows.cluster_labels()) split.add_cluster(label);
  Rng rng(5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows.event(i) && rng.bernoulli(0.5)) {
      const double mid = rng.uniform(rows.start(i), rows.stop(i));
      if (mid > rows.start(i) && mid < rows.stop(i)) {
        split.add_row(rows.cluster(i), rows.start(i), mid, false, rows.x_row(i));
        split.add_row(rows.cluster(i), mid, rows.stop(i), false, rows.x_row(i));
        continue;
      }
    }
    split.add_row(rows.cluster(i), rows.start(i), rows.stop(i), rows.event(i), rows.x_row(i));
  }
  ASSERT_GT(split.size(), rows.size());
  const PerrEstimate a = interaction_estimate(rows, PerrMethod::ag, ds, {});
  const PerrEstimate b = interaction_estimate(split, PerrMethod::ag, ds, {});
  EXPECT_NEAR(a.perr_hr, b.perr_hr, 1e-10);
  EXPECT_NEAR(a.hr_prior, b.hr_prior, 1e-10);
  EXPECT_NEAR(a.se_log, b.se_log, 1e-10);
}

TEST(Perr, AgEqualsCoxWhenEventsCloseEachPeriod) {
  // Every event falls exactly at the end of its period, so the all-event and
  // first-event layouts coincide.
  CohortDataset ds;
  ds.matched = true;
  Rng rng(6);
  for (int i = 0; i < 60; ++i) {
    const std::string pid = "t" + std::to_string(i);
    for (Group g : {Group::treated, Group::control}) {
      const double b = std::round(rng.uniform(30, 120));
      const double c = b + std::round(rng.uniform(20, 150));
      std::vector<double> ev;
      if (rng.bernoulli(g == Group::treated ? 0.6 : 0.4)) ev.push_back(b);
      if (rng.bernoulli(g == Group::treated ? 0.3 : 0.4)) ev.push_back(c);
      ds.participants.push_back(person(g == Group::treated ? pid : "c" + std::to_string(i), g, pid, 0, b, c, ev));
    }
  }
  const PerrEstimate cox = perr_cox(ds), ag = perr_ag(ds);
  EXPECT_NEAR(std::log(cox.hr_prior), std::log(ag.hr_prior), 1e-8);
  EXPECT_NEAR(std::log(cox.perr_hr), std::log(ag.perr_hr), 1e-8);
}

TEST(Perr, OriginalAndCoxAgreeClosely) {
  const CohortDataset ds = sim_cohort(7);
  const auto pt = perr_original_point(ds);
  const PerrEstimate cox = perr_cox(ds);
  EXPECT_NEAR(pt.log_hr_post - pt.log_hr_prior, std::log(cox.perr_hr), 0.05);
}

TEST(Perr, BootstrapIsSeededAndThreadIndependent) {
  const CohortDataset ds = sim_cohort(8);
  const PerrEstimate a = perr_original(ds, 30, 77, {}, 1);
  const PerrEstimate b = perr_original(ds, 30, 77, {}, 3);
  const PerrEstimate c = perr_original(ds, 30, 78, {}, 1);
  EXPECT_EQ(a.ci_low, b.ci_low);
  EXPECT_EQ(a.ci_high, b.ci_high);
  EXPECT_EQ(a.se_log, b.se_log);
  EXPECT_NE(a.ci_low, c.ci_low);
  EXPECT_EQ(a.perr_hr, c.perr_hr);
}

TEST(Perr, TreatmentEffectIsRecoveredRoughly) {
  // Desk-scale sanity check: a few replicates of the main scenario land near 0.5.
  double sum = 0.0;
  for (std::uint64_t s = 10; s < 14; ++s) sum += std::log(perr_ag(sim_cohort(s)).perr_hr);
  EXPECT_NEAR(std::exp(sum / 4), 0.5, 0.1);
}

}  // namespace
}  // namespace perr
