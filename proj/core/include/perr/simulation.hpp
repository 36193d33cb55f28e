#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "perr/cohort.hpp"
#include "perr/rng.hpp"

namespace perr {

enum class ConfounderKind {
  binary_half,      // X ~ Bernoulli(0.5)
  gamma_4_quarter,  // exp(X) ~ Gamma(shape 4, scale 1/4)
};

std::string to_string(ConfounderKind k);
ConfounderKind parse_confounder(const std::string& text);

/// Every knob of the data-generating process and of the analysis run on it.
/// Treatment hazard: kappa1 t^(kappa1-1) exp(c0 + alpha1 X + z_effect Z + eps).
/// Event hazard: 0.5 kappa2 t^(kappa2-1) exp(beta0 + beta P(t) + alpha2 X + z_effect Z + w).
struct ScenarioSpec {
  std::string name = "custom";
  std::string description;

  int n_prematch = 3000;
  double kappa1 = 1.25;
  double kappa2 = 1.25;
  double c0 = -8.0;
  double beta0 = -7.0;
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double z_effect = 0.5;
  double sigma_omega_sq = 0.0;
  double epsilon_var = 0.1;
  double theta = 1.0;
  std::optional<double> theta_second;  // two-phase EDT: theta for (0, delta/2], theta_second for (delta/2, delta]
  double delta = 0.0;
  double beta = -0.69314718055994530942;  // ln 0.5
  double tau_min = 200.0;
  double tau_max = 300.0;
  ConfounderKind confounder = ConfounderKind::binary_half;

  int replicates = 1000;
  std::uint64_t seed = 20240601;
  int min_pairs = 100;

  // Analysis settings.
  std::optional<AnalysisWindow> window = AnalysisWindow{};
  bool run_original = false;
  int bootstrap_reps = 200;  // 0 = point estimate only
  bool run_cox = true;
  bool run_ag = true;
  bool run_edt = false;
  int gaps = 5;
  double gap_width = 10.0;
  bool use_true_edt = false;

  double true_hr() const;
  bool has_edt() const { return delta > 0.0 && (theta != 1.0 || (theta_second && *theta_second != 1.0)); }
};

/// Throws DataError describing the first invalid field.
void validate_spec(const ScenarioSpec& spec);

/// A pre-match person with the latent quantities used to generate them.
struct SimulatedPerson {
  Participant participant;  // prior_start 0, index_time = treatment time (treated) or tau, end_time = tau
  double x = 0.0;
  int z = 0;
  double epsilon = 0.0;
  double w = 0.0;
  double tau = 0.0;
  double treatment_time = 0.0;  // after all EDT updates
  bool treated = false;
};

/// Cumulative-hazard inversion for a Weibull-type hazard scale * kappa * t^(kappa-1)
/// left-truncated at `from`: returns t with scale (t^kappa - from^kappa) = -ln u.
double weibull_inverse(double u, double scale, double kappa, double from);

/// Treatment time after one event at `event_time` rescales the treatment
/// hazard by theta on (event, event + delta] (two-phase when theta_second is set).
double edt_update_treatment_time(double treatment_time, double event_time, const ScenarioSpec& spec);

SimulatedPerson draw_participant(const ScenarioSpec& spec, Rng& rng, std::string id);

struct SimulatedCohort {
  CohortDataset dataset;  // matched
  std::size_t prematch_treated = 0;
  std::size_t prematch_controls = 0;
  int redraws = 0;
};

/// Draws n_prematch people, matches treated to controls 1:1 on Z, and redraws
/// from derived seeds while fewer than min_pairs pairs form.
SimulatedCohort assemble_matched_cohort(const ScenarioSpec& spec, std::uint64_t seed);

/// Pre-match population only (groups set, no pairs); used for exporting cohorts.
CohortDataset draw_population(const ScenarioSpec& spec, std::uint64_t seed);

/// One estimator's output in one replicate; NaN estimate means it failed.
struct ReplicateEstimate {
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  bool ok() const { return estimate == estimate; }
};

struct ReplicateRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  int cohort_redraws = 0;
  std::size_t matched_size = 0;
  ReplicateEstimate original, cox, ag, corrected;
  bool detected = false;
  double delta_hat = 0.0;
  double theta_hat = std::numeric_limits<double>::quiet_NaN();
  std::size_t dropped_pairs = 0;
  std::string error;  // first estimator failure, if any
};

struct EstimatorSummary {
  std::string name;
  std::size_t n = 0;  // replicates contributing
  double mean = 0.0;
  double cp = std::numeric_limits<double>::quiet_NaN();  // percent; NaN when no intervals
  double rmse = 0.0;
};

struct EdtSummary {
  double p_exact = 0.0;    // P(delta_hat == delta), percent
  double p_within = 0.0;   // P(|delta_hat - delta| <= gap_width), percent
  double mean_theta_exact = std::numeric_limits<double>::quiet_NaN();
  double mean_theta_within = std::numeric_limits<double>::quiet_NaN();
  double mean_theta = std::numeric_limits<double>::quiet_NaN();
  std::size_t detected = 0;
};

struct SimSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t replicates = 0;
  std::size_t failures = 0;  // replicates where at least one estimator failed
  std::size_t cohort_redraws = 0;
  double true_hr = 0.0;
  double mean_matched_size = 0.0;
  std::vector<EstimatorSummary> estimators;
  std::optional<EdtSummary> edt;

  const EstimatorSummary* find(const std::string& name) const;
};

struct ScenarioRun {
  SimSummary summary;
  std::vector<ReplicateRecord> replicates;
};

ReplicateRecord run_replicate(const ScenarioSpec& spec, std::size_t index);

/// Runs spec.replicates replicates on up to `threads` workers. Output is a
/// pure function of the spec (seed included), independent of the thread count.
ScenarioRun run_scenario(const ScenarioSpec& spec, int threads = 1);

SimSummary summarize(const ScenarioSpec& spec, const std::vector<ReplicateRecord>& records);

}  // namespace perr
