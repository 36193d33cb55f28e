#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perr/cohort.hpp"
#include "perr/perr_estimators.hpp"

namespace perr {

/// Interaction estimate for one sub-period before the index time.
struct GapEstimate {
  int gap = 0;          // 1 = earliest, M = immediately before the index time
  double from = 0.0;    // sub-period is (B + from, B + to], offsets in days (negative)
  double to = 0.0;
  bool estimable = false;  // false when the sub-period has no events in an arm
  double estimate = 0.0;   // log scale
  double se = 0.0;         // robust
  double z = 0.0;
};

struct EdtProfile {
  int gaps = 0;
  double gap_width = 0.0;
  std::vector<GapEstimate> per_gap;
  double b1 = 0.0;  // treated main effect
};

struct EdtDecision {
  bool detected = false;
  double delta_hat = 0.0;
  std::optional<double> theta_hat;
  double theta_se_log = 0.0;
};

struct DeltaDecision {
  bool detected = false;
  double delta_hat = 0.0;
};

inline constexpr double kSignificanceZ = 1.96;

/// Andersen-Gill fit on prior-period rows with trt, gap_m and trt:gap_m for
/// m = 1..M. A sub-period without events in either arm is reported as
/// inestimable and left out of the model instead of failing the fit.
EdtProfile fit_multi_gap(const CohortDataset& dataset, int gaps, double gap_width,
                         const FitConfig& config = {});

/// EDT is declared when the last sub-period is significant; delta_hat is the
/// width of the unbroken run of significant sub-periods ending at it.
DeltaDecision decide_delta(const EdtProfile& profile);

/// Single-gap refit of width delta_hat; theta_hat = exp(trt:gap coefficient).
EdtDecision estimate_theta(const CohortDataset& dataset, double delta_hat,
                           const FitConfig& config = {});

/// Moves an index time B the way event-dependent treatment would have moved
/// it. theta > 1: only the latest event before B counts. theta < 1: every
/// event before the (moving) B is applied in time order.
double shift_index_time(double index_time, std::span<const double> events, double theta,
                        double delta);

struct ControlStar {
  CohortDataset dataset;
  std::vector<std::string> dropped_pairs;
};

/// data(control*): controls' index times shifted by the estimated EDT; pairs
/// whose shifted control index passes the end of follow-up are removed.
ControlStar build_control_star(const CohortDataset& dataset, const EdtDecision& decision);

struct CorrectedPerr {
  EdtProfile profile;
  EdtDecision decision;
  PerrEstimate uncorrected;
  PerrEstimate corrected;
  std::size_t dropped_pairs = 0;
};

/// Detection, theta estimation, control shift and PERR_AG on the corrected
/// data. When nothing is detected the corrected estimate equals the uncorrected one.
///
/// With a window, every fit runs on the window-restricted data, but control*
/// is built from the full follow-up and windowed afterwards, so the window
/// follows the shifted index time.
CorrectedPerr corrected_perr_ag(const CohortDataset& dataset, int gaps, double gap_width,
                                const PerrOptions& options = {},
                                const std::optional<AnalysisWindow>& window = std::nullopt);

/// Correction with a known (delta, theta) instead of estimates.
CorrectedPerr corrected_perr_ag_known(const CohortDataset& dataset, double delta, double theta,
                                      const PerrOptions& options = {},
                                      const std::optional<AnalysisWindow>& window = std::nullopt);

}  // namespace perr
