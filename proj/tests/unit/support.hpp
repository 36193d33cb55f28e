#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "perr/cohort.hpp"
#include "perr/counting_process.hpp"
#include "perr/rng.hpp"

namespace perr::test {

inline Participant person(std::string id, Group g, std::string pair, double a, double b, double c,
                          std::vector<double> events = {}, std::map<std::string, std::string> cov = {}) {
  Participant p;
  p.id = std::move(id);
  p.group = g;
  p.pair_id = std::move(pair);
  p.prior_start = a;
  p.index_time = b;
  p.end_time = c;
  p.event_times = std::move(events);
  p.covariates = std::move(cov);
  return p;
}

/// Random matched cohort of `pairs` pairs with exponential-ish event times.
inline CohortDataset random_cohort(std::uint64_t seed, int pairs, double rate_treated = 0.02,
                                   double rate_control = 0.01) {
  Rng rng(seed);
  CohortDataset ds;
  ds.matched = true;
  for (int i = 0; i < pairs; ++i) {
    const double b = std::round(rng.uniform(40.0, 160.0));
    const std::string pid = "t" + std::to_string(i);
    for (Group g : {Group::treated, Group::control}) {
      const double c = std::round(rng.uniform(b + 20.0, 300.0));
      Participant p = person(g == Group::treated ? pid : "c" + std::to_string(i), g, pid, 0.0, b, c);
      const double rate = g == Group::treated ? rate_treated : rate_control;
      double t = 0.0;
      while (true) {
        t += std::ceil(-std::log(rng.uniform_open()) / rate);
        if (t > c) break;
        p.event_times.push_back(t);
      }
      ds.participants.push_back(std::move(p));
    }
  }
  return ds;
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("perr_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace perr::test
