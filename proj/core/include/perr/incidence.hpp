#pragma once

#include <cstddef>

#include "perr/cohort.hpp"

namespace perr {

inline constexpr double kDaysPerYear = 365.25;

struct IncidenceCell {
  std::size_t events = 0;
  double person_years = 0.0;
  double rate() const noexcept { return person_years > 0.0 ? events / person_years : 0.0; }
};

/// Events per person-year by group and period.
struct IncidenceTable {
  IncidenceCell treated_prior, treated_post, control_prior, control_post;
};

IncidenceTable incidence_table(const CohortDataset& dataset);

}  // namespace perr
