#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace perr {

enum class Group { treated, control };

std::string to_string(Group g);
Group parse_group(const std::string& text);

/// One subject's follow-up. Prior period is (prior_start, index_time],
/// post period is (index_time, end_time]. For treated persons index_time is
/// the treatment time; for matched controls it is copied from the partner.
struct Participant {
  std::string id;
  Group group = Group::control;
  std::string pair_id;  // empty when not (yet) matched
  double prior_start = 0.0;
  double index_time = 0.0;
  double end_time = 0.0;
  std::map<std::string, std::string> covariates;
  std::vector<double> event_times;  // strictly increasing

  bool is_treated() const noexcept { return group == Group::treated; }
};

struct CohortDataset {
  std::vector<Participant> participants;
  bool matched = false;
};

/// Days kept on either side of the index time.
struct AnalysisWindow {
  double prior_days = 150.0;
  double post_days = 150.0;
};

enum class ViolationKind {
  span_order,         // prior_start <= index_time <= end_time fails
  event_order,        // event times not strictly increasing
  event_out_of_span,  // event outside (prior_start, end_time]
  duplicate_id,
  unpaired,           // matched dataset: treated/control without a partner
  pair_mismatch,      // pair_id shared by something other than one treated + one control
};

struct Violation {
  std::string participant_id;
  ViolationKind kind;
  std::string message;
};

std::vector<Violation> validate(const CohortDataset& dataset);

/// Throws DataError listing the first few violations when the dataset is malformed.
void require_valid(const CohortDataset& dataset);

struct MatchReport {
  std::size_t treated_in = 0;
  std::size_t pool_in = 0;
  std::size_t pairs = 0;
  std::size_t unmatched_treated = 0;
  std::size_t unused_controls = 0;
  // key-value combination -> number of pairs formed with it
  std::map<std::string, std::size_t> key_distribution;
};

struct MatchResult {
  CohortDataset dataset;
  MatchReport report;
};

enum class MatchRule {
  random,       // uniform draw among eligible controls (seeded)
  closest_end,  // eligible control with the smallest end_time surplus, ties by input order
};

std::string to_string(MatchRule r);
MatchRule parse_match_rule(const std::string& text);

struct MatchOptions {
  MatchRule rule = MatchRule::random;
  std::uint64_t seed = 1;
};

/// 1:1 exact matching on `keys` with the risk-set condition: the control must
/// still be under follow-up (end_time > index_time) when the treated partner
/// starts treatment. Treated persons are processed in ascending index_time
/// (stable in input order) and each takes one unused eligible control chosen
/// by `options.rule`. Output is a pure function of the inputs and the seed.
///
/// The rule matters: picking the control whose follow-up ends soonest after
/// the index enriches the post period with controls that were untreated only
/// because follow-up was short, which shifts the confounder mix between
/// periods and biases PERR.
MatchResult match_controls(std::span<const Participant> treated,
                           std::span<const Participant> pool,
                           std::span<const std::string> keys, const MatchOptions& options = {});

struct WindowResult {
  CohortDataset dataset;
  std::vector<std::string> excluded_ids;  // participants dropped with their pairs, in input order
};

WindowResult restrict_window(const CohortDataset& dataset, const AnalysisWindow& window);

/// Events in (prior_start, index_time] and (index_time, end_time] respectively.
std::span<const double> prior_events(const Participant& p);
std::span<const double> post_events(const Participant& p);

}  // namespace perr
