#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "perr/cohort_io.hpp"
#include "perr/errors.hpp"
#include "support.hpp"

namespace perr {
namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

TEST(Csv, ReportsLineAndColumnForBadNumbers) {
  std::istringstream in("id,time\na,1.5\nb,oops\n");
  const auto t = CsvTable::parse(in, "events.csv");
  EXPECT_EQ(t.number(0, 1), 1.5);
  const auto msg = error_of([&] { t.number(1, 1); });
  EXPECT_NE(msg.find("events.csv:3:2"), std::string::npos) << msg;
}

TEST(Csv, RejectsRaggedRows) {
  std::istringstream in("id,time\na,1,2\n");
  const auto msg = error_of([&] { CsvTable::parse(in, "x.csv"); });
  EXPECT_NE(msg.find("x.csv:2"), std::string::npos) << msg;
}

TEST(Csv, MissingColumnIsNamed) {
  std::istringstream in("id\na\n");
  const auto t = CsvTable::parse(in, "x.csv");
  const auto msg = error_of([&] { t.require_column("time"); });
  EXPECT_NE(msg.find("time"), std::string::npos);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(150.0), "150");
  const double v = 0.1234567890123456789;
  EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(CohortIo, WriteThenReadRoundTrips) {
  CohortDataset ds = test::random_cohort(5, 10);
  for (auto& p : ds.participants) p.covariates["age_band"] = "60-64";
  const auto dir = test::scratch_dir("io_roundtrip");
  write_cohort(dir, ds);
  const CohortDataset back = read_cohort_dir(dir);
  ASSERT_EQ(back.participants.size(), ds.participants.size());
  EXPECT_TRUE(back.matched);
  for (std::size_t i = 0; i < ds.participants.size(); ++i) {
    const auto& a = ds.participants[i];
    const auto& b = back.participants[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.group, b.group);
    EXPECT_EQ(a.pair_id, b.pair_id);
    EXPECT_EQ(a.prior_start, b.prior_start);
    EXPECT_EQ(a.index_time, b.index_time);
    EXPECT_EQ(a.end_time, b.end_time);
    EXPECT_EQ(a.event_times, b.event_times);
    EXPECT_EQ(b.covariates.at("age_band"), "60-64");
  }
}

TEST(CohortIo, UnknownEventIdIsLocated) {
  const auto dir = test::scratch_dir("io_unknown");
  std::ofstream(dir / "p.csv") << "id,group,prior_start,index_time,end_time\na,control,0,,10\n";
  std::ofstream(dir / "e.csv") << "id,time\nzz,3\n";
  const auto msg = error_of([&] { read_cohort(dir / "p.csv", dir / "e.csv"); });
  EXPECT_NE(msg.find("e.csv:2:1"), std::string::npos) << msg;
}

TEST(CohortIo, PreMatchInputWithoutPairColumn) {
  const auto dir = test::scratch_dir("io_prematch");
  std::ofstream(dir / "p.csv") << "id,group,prior_start,index_time,end_time,Z\na,control,0,,10,1\nb,treated,0,4,10,1\n";
  std::ofstream(dir / "e.csv") << "id,time\nb,3\nb,1\n";
  const auto ds = read_cohort(dir / "p.csv", dir / "e.csv");
  EXPECT_FALSE(ds.matched);
  EXPECT_EQ(ds.participants[0].index_time, 10.0);
  EXPECT_EQ(ds.participants[1].event_times, (std::vector<double>{1, 3}));
  EXPECT_EQ(ds.participants[1].covariates.at("Z"), "1");
}

}  // namespace
}  // namespace perr
