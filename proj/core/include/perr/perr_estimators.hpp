#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "perr/cohort.hpp"
#include "perr/survival.hpp"

namespace perr {

enum class PerrMethod { original, cox_interaction, ag };

std::string to_string(PerrMethod m);

struct BootstrapDiagnostics {
  int replicates = 0;
  int redraws = 0;       // resamples rejected for lacking events in a period
  bool warning = false;  // redraws >= 10% of replicates
};

/// PERR HR = HR_post / HR_prior, with a 95% interval by default.
struct PerrEstimate {
  PerrMethod method = PerrMethod::cox_interaction;
  double hr_prior = 1.0;
  double hr_post = 1.0;
  double perr_hr = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  double se_log = 0.0;  // of log perr_hr
  Interval prior_ci;
  Interval post_ci;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  std::size_t events_prior = 0;
  std::size_t events_post = 0;
  std::optional<BootstrapDiagnostics> bootstrap;
  std::optional<std::uint64_t> seed;
};

struct PerrOptions {
  double level = 0.95;
  FitConfig fit;
};

/// Point estimates of the original two-model PERR (separate time-to-first-event
/// Cox fits in the prior and post periods, treatment as the only covariate).
struct TwoModelPoint {
  double log_hr_prior = 0.0;
  double log_hr_post = 0.0;
};
TwoModelPoint perr_original_point(const CohortDataset& dataset, const FitConfig& config = {});

/// Original PERR with a percentile bootstrap over matched pairs.
PerrEstimate perr_original(const CohortDataset& dataset, int bootstrap_reps, std::uint64_t seed,
                           const PerrOptions& options = {}, int threads = 1);

/// Single Cox model with trt, post and trt:post on first-event rows.
PerrEstimate perr_cox(const CohortDataset& dataset, const PerrOptions& options = {});

/// The same interaction model on all-event (Andersen-Gill) rows.
PerrEstimate perr_ag(const CohortDataset& dataset, const PerrOptions& options = {});

/// Fits trt + post + trt:post on `rows` and packs the estimate; shared by
/// perr_cox and perr_ag and reused by the correction pipeline.
PerrEstimate interaction_estimate(const SurvivalFrame& rows, PerrMethod method,
                                  const CohortDataset& dataset, const PerrOptions& options);

}  // namespace perr
