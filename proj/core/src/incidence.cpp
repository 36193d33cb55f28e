#include "perr/incidence.hpp"

namespace perr {

IncidenceTable incidence_table(const CohortDataset& dataset) {
  IncidenceTable table;
  for (const auto& p : dataset.participants) {
    auto& prior = p.is_treated() ? table.treated_prior : table.control_prior;
    auto& post = p.is_treated() ? table.treated_post : table.control_post;
    prior.events += prior_events(p).size();
    post.events += post_events(p).size();
    prior.person_years += (p.index_time - p.prior_start) / kDaysPerYear;
    post.person_years += (p.end_time - p.index_time) / kDaysPerYear;
  }
  return table;
}

}  // namespace perr
