#include <algorithm>

#include <gtest/gtest.h>

#include "perr/counting_process.hpp"
#include "perr/errors.hpp"
#include "perr/incidence.hpp"
#include "support.hpp"

namespace perr {
namespace {

using test::person;

struct Row {
  double start, stop;
  bool event;
  double trt, post;
};

std::vector<Row> rows_of(const SurvivalFrame& f) {
  std::vector<Row> out;
  const auto trt = f.column("trt");
  const auto post = f.column("post");
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.push_back({f.start(i), f.stop(i), f.event(i), f.x(i, trt), f.x(i, post)});
  }
  return out;
}

CohortDataset single(const Participant& p) {
  CohortDataset ds;
  ds.participants.push_back(p);
  return ds;
}

void expect_row(const Row& r, double start, double stop, bool event, double trt, double post) {
  EXPECT_EQ(r.start, start);
  EXPECT_EQ(r.stop, stop);
  EXPECT_EQ(r.event, event);
  EXPECT_EQ(r.trt, trt);
  EXPECT_EQ(r.post, post);
}

TEST(FirstEventRows, TreatedWithEventsInBothPeriods) {
  const auto r = rows_of(build_first_event_rows(single(person("t", Group::treated, "p", 0, 100, 200, {50, 60, 150}))));
  ASSERT_EQ(r.size(), 2u);
  expect_row(r[0], 0, 50, true, 1, 0);
  expect_row(r[1], 100, 150, true, 1, 1);
}

TEST(FirstEventRows, ControlWithoutEvents) {
  const auto r = rows_of(build_first_event_rows(single(person("c", Group::control, "p", 0, 100, 200))));
  ASSERT_EQ(r.size(), 2u);
  expect_row(r[0], 0, 100, false, 0, 0);
  expect_row(r[1], 100, 200, false, 0, 1);
}

TEST(FirstEventRows, PriorEventsOnly) {
  const auto r = rows_of(build_first_event_rows(single(person("t", Group::treated, "p", 0, 100, 200, {50, 60}))));
  ASSERT_EQ(r.size(), 2u);
  expect_row(r[0], 0, 50, true, 1, 0);
  expect_row(r[1], 100, 200, false, 1, 1);
}

TEST(AllEventRows, SplitsAtEventsAndIndex) {
  const auto r = rows_of(build_all_event_rows(single(person("t", Group::treated, "p", 0, 100, 200, {50, 60, 150}))));
  ASSERT_EQ(r.size(), 5u);
  expect_row(r[0], 0, 50, true, 1, 0);
  expect_row(r[1], 50, 60, true, 1, 0);
  expect_row(r[2], 60, 100, false, 1, 0);
  expect_row(r[3], 100, 150, true, 1, 1);
  expect_row(r[4], 150, 200, false, 1, 1);
}

TEST(AllEventRows, NoEventsGivesTwoCensoredRows) {
  const auto r = rows_of(build_all_event_rows(single(person("c", Group::control, "p", 0, 100, 200))));
  ASSERT_EQ(r.size(), 2u);
  expect_row(r[0], 0, 100, false, 0, 0);
  expect_row(r[1], 100, 200, false, 0, 1);
}

TEST(AllEventRows, EventAtIndexEndsThePriorPeriod) {
  const auto r = rows_of(build_all_event_rows(single(person("c", Group::control, "p", 0, 100, 200, {100}))));
  ASSERT_EQ(r.size(), 2u);
  expect_row(r[0], 0, 100, true, 0, 0);
  expect_row(r[1], 100, 200, false, 0, 1);
}

std::vector<std::pair<double, double>> gap_spans(const SurvivalFrame& f, int gaps) {
  std::vector<std::pair<double, double>> spans(static_cast<std::size_t>(gaps), {1e300, -1e300});
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int m = 1; m <= gaps; ++m) {
      if (f.x(i, f.column(gap_name(m))) == 1.0) {
        auto& s = spans[static_cast<std::size_t>(m - 1)];
        s.first = std::min(s.first, f.start(i));
        s.second = std::max(s.second, f.stop(i));
      }
    }
  }
  return spans;
}

TEST(GapRows, FiveGapsOfTenDays) {
  const auto f = build_gap_rows(single(person("t", Group::treated, "p", 0, 100, 200, {55, 95})), 5, 10);
  const auto spans = gap_spans(f, 5);
  for (int m = 1; m <= 5; ++m) {
    EXPECT_EQ(spans[m - 1].first, 40.0 + 10 * m) << m;
    EXPECT_EQ(spans[m - 1].second, 50.0 + 10 * m) << m;
  }
  double last_stop = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) last_stop = std::max(last_stop, f.stop(i));
  EXPECT_EQ(last_stop, 100.0);  // prior period only
  EXPECT_EQ(f.event_count(), 2u);
}

TEST(GapRows, LateStartTruncatesEarlyGaps) {
  const auto f = build_gap_rows(single(person("t", Group::treated, "p", 75, 100, 200)), 5, 10);
  const auto spans = gap_spans(f, 5);
  EXPECT_GT(spans[0].first, spans[0].second);  // gap_1 absent
  EXPECT_GT(spans[1].first, spans[1].second);  // gap_2 absent
  EXPECT_EQ(spans[2].first, 75.0);             // gap_3 partial
  EXPECT_EQ(spans[2].second, 80.0);
  EXPECT_EQ(spans[3].first, 80.0);
  EXPECT_EQ(spans[4].second, 100.0);
}

TEST(GapRows, WeeklyGapsGiveSixIndicators) {
  const auto f = build_gap_rows(single(person("t", Group::treated, "p", 0, 100, 200)), 6, 7);
  EXPECT_EQ(f.dimension(), 7u);
  const auto spans = gap_spans(f, 6);
  EXPECT_EQ(spans[5].first, 93.0);
  EXPECT_EQ(spans[0].first, 58.0);
}

// Conservation: events and exposure time survive every row builder.
class Conservation : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(Conservation, EventsAndTime) {
  const CohortDataset ds = test::random_cohort(GetParam(), 30, 0.03, 0.02);
  const SurvivalFrame all = build_all_event_rows(ds);
  const SurvivalFrame first = build_first_event_rows(ds);
  const SurvivalFrame gaps = build_gap_rows(ds, 4, 12);

  std::size_t total_events = 0, first_events = 0, prior_total = 0;
  double total_time = 0.0, prior_time = 0.0;
  for (const auto& p : ds.participants) {
    total_events += p.event_times.size();
    first_events += (prior_events(p).empty() ? 0 : 1) + (post_events(p).empty() ? 0 : 1);
    prior_total += prior_events(p).size();
    total_time += p.end_time - p.prior_start;
    prior_time += p.index_time - p.prior_start;
  }
  EXPECT_EQ(all.event_count(), total_events);
  EXPECT_EQ(first.event_count(), first_events);
  EXPECT_EQ(gaps.event_count(), prior_total);

  auto time_of = [](const SurvivalFrame& f) {
    double t = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) t += f.stop(i) - f.start(i);
    return t;
  };
  EXPECT_NEAR(time_of(all), total_time, 1e-9);
  EXPECT_NEAR(time_of(gaps), prior_time, 1e-9);

  // Per participant rows tile (A, C] without overlap.
  std::map<int, std::vector<std::pair<double, double>>> by_cluster;
  for (std::size_t i = 0; i < all.size(); ++i) by_cluster[all.cluster(i)].push_back({all.start(i), all.stop(i)});
  for (auto& [c, spans] : by_cluster) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t k = 1; k < spans.size(); ++k) EXPECT_EQ(spans[k].first, spans[k - 1].second);
    const auto& p = ds.participants[static_cast<std::size_t>(c)];
    EXPECT_EQ(spans.front().first, p.prior_start);
    EXPECT_EQ(spans.back().second, p.end_time);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, Conservation, ::testing::Values(11u, 12u, 13u, 14u, 15u));

TEST(Frame, RejectsEmptyInterval) {
  SurvivalFrame f({"x"});
  const int c = f.add_cluster("a");
  const double x[] = {1.0};
  EXPECT_THROW(f.add_row(c, 5, 5, true, x), DataError);
}

TEST(Frame, DesignBuildsProducts) {
  const auto f = build_all_event_rows(single(person("t", Group::treated, "p", 0, 100, 200, {150})));
  const auto d = f.design({{"trt", {"trt"}}, {"post", {"post"}}, {"trt:post", {"trt", "post"}}});
  ASSERT_EQ(d.dimension(), 3u);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d.x(i, 2), d.x(i, 0) * d.x(i, 1));
}

TEST(Incidence, RateIsEventsPerPersonTime) {
  EXPECT_NEAR((IncidenceCell{441, 130}.rate()), 3.39, 0.005);
  EXPECT_NEAR((IncidenceCell{222, 286}.rate()), 0.78, 0.005);
  EXPECT_EQ((IncidenceCell{0, 12.5}.rate()), 0.0);
}

TEST(Incidence, CountsByGroupAndPeriod) {
  CohortDataset ds;
  ds.matched = true;
  ds.participants.push_back(person("t", Group::treated, "p", 0, 365.25, 730.5, {10, 20, 400}));
  ds.participants.push_back(person("c", Group::control, "p", 0, 365.25, 730.5, {500}));
  const auto t = incidence_table(ds);
  EXPECT_EQ(t.treated_prior.events, 2u);
  EXPECT_EQ(t.treated_post.events, 1u);
  EXPECT_EQ(t.control_prior.events, 0u);
  EXPECT_EQ(t.control_post.events, 1u);
  EXPECT_DOUBLE_EQ(t.treated_prior.person_years, 1.0);
  EXPECT_DOUBLE_EQ(t.treated_prior.rate(), 2.0);
}

}  // namespace
}  // namespace perr
