#include "perr/edt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>

#include "perr/counting_process.hpp"
#include "perr/errors.hpp"

namespace perr {

EdtProfile fit_multi_gap(const CohortDataset& dataset, int gaps, double gap_width,
                         const FitConfig& config) {
  const SurvivalFrame rows = build_gap_rows(dataset, gaps, gap_width);

  // Events per (sub-period, arm); a zero cell makes the interaction inestimable.
  std::vector<std::array<std::size_t, 2>> cell(static_cast<std::size_t>(gaps) + 1, {0, 0});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows.event(i)) continue;
    std::size_t m = 0;
    for (int g = 1; g <= gaps; ++g) {
      if (rows.x(i, static_cast<std::size_t>(g)) > 0.5) m = static_cast<std::size_t>(g);
    }
    cell[m][rows.x(i, 0) > 0.5 ? 1 : 0]++;
  }

  EdtProfile profile;
  profile.gaps = gaps;
  profile.gap_width = gap_width;
  std::vector<std::pair<std::string, std::vector<std::string>>> spec{{"trt", {"trt"}}};
  std::vector<int> kept;
  for (int m = 1; m <= gaps; ++m) {
    GapEstimate g;
    g.gap = m;
    g.from = -(gaps - m + 1) * gap_width;
    g.to = -(gaps - m) * gap_width;
    g.estimable = cell[static_cast<std::size_t>(m)][0] > 0 && cell[static_cast<std::size_t>(m)][1] > 0;
    profile.per_gap.push_back(g);
    if (g.estimable) kept.push_back(m);
  }
  for (int m : kept) spec.push_back({gap_name(m), {gap_name(m)}});
  for (int m : kept) spec.push_back({"trt:" + gap_name(m), {"trt", gap_name(m)}});

  const FitResult f = fit(rows.design(spec), config);
  profile.b1 = f.coefficients[0];
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const std::size_t col = 1 + kept.size() + k;
    auto& g = profile.per_gap[static_cast<std::size_t>(kept[k] - 1)];
    g.estimate = f.coefficients[static_cast<Eigen::Index>(col)];
    g.se = f.robust_se(col);
    g.z = g.se > 0.0 ? g.estimate / g.se : 0.0;
  }
  return profile;
}

DeltaDecision decide_delta(const EdtProfile& profile) {
  auto significant = [](const GapEstimate& g) {
    return g.estimable && std::abs(g.z) >= kSignificanceZ;
  };
  DeltaDecision d;
  int run = 0;
  for (auto it = profile.per_gap.rbegin(); it != profile.per_gap.rend() && significant(*it); ++it) {
    ++run;
  }
  d.detected = run > 0;
  d.delta_hat = run * profile.gap_width;
  return d;
}

EdtDecision estimate_theta(const CohortDataset& dataset, double delta_hat, const FitConfig& config) {
  if (!(delta_hat > 0.0)) throw DataError("theta estimation needs a positive gap width");
  const SurvivalFrame rows = build_gap_rows(dataset, 1, delta_hat);
  const std::string gap = gap_name(1);
  const FitResult f =
      fit(rows.design({{"trt", {"trt"}}, {gap, {gap}}, {"trt:" + gap, {"trt", gap}}}), config);
  EdtDecision d;
  d.detected = true;
  d.delta_hat = delta_hat;
  d.theta_hat = std::exp(f.coefficients[2]);
  d.theta_se_log = f.robust_se(2);
  return d;
}

ControlStar build_control_star(const CohortDataset& dataset, const EdtDecision& decision) {
  if (!decision.detected || !decision.theta_hat) {
    throw DataError("control* construction requires a detected EDT with an estimated theta");
  }
  if (!dataset.matched) throw DataError("control* construction requires a matched dataset");
  const double theta = *decision.theta_hat;
  if (!(theta > 0.0)) throw DataError("theta must be positive");

  ControlStar out;
  out.dataset.matched = true;
  std::vector<Participant> shifted = dataset.participants;
  std::unordered_set<std::string> dropped;
  for (auto& p : shifted) {
    if (p.is_treated()) continue;
    const double B = shift_index_time(p.index_time, p.event_times, theta, decision.delta_hat);
    if (B > p.end_time) {
      dropped.insert(p.pair_id);
      continue;
    }
    p.index_time = B;
  }
  for (auto& p : shifted) {
    if (dropped.contains(p.pair_id)) continue;
    out.dataset.participants.push_back(std::move(p));
  }
  out.dropped_pairs.assign(dropped.begin(), dropped.end());
  std::sort(out.dropped_pairs.begin(), out.dropped_pairs.end());
  if (out.dataset.participants.empty()) {
    throw DataError("every matched pair was dropped while shifting control index times");
  }
  return out;
}

namespace {

CohortDataset windowed(const CohortDataset& dataset, const std::optional<AnalysisWindow>& window) {
  return window ? restrict_window(dataset, *window).dataset : dataset;
}

PerrEstimate corrected_estimate(const CohortDataset& dataset, const EdtDecision& decision,
                                const PerrOptions& options,
                                const std::optional<AnalysisWindow>& window, std::size_t& dropped) {
  ControlStar star = build_control_star(dataset, decision);
  dropped = star.dropped_pairs.size();
  return perr_ag(windowed(star.dataset, window), options);
}

}  // namespace

CorrectedPerr corrected_perr_ag(const CohortDataset& dataset, int gaps, double gap_width,
                                const PerrOptions& options,
                                const std::optional<AnalysisWindow>& window) {
  const CohortDataset analysis = windowed(dataset, window);
  CorrectedPerr out;
  out.uncorrected = perr_ag(analysis, options);
  out.profile = fit_multi_gap(analysis, gaps, gap_width, options.fit);
  const DeltaDecision dd = decide_delta(out.profile);
  if (!dd.detected) {
    out.corrected = out.uncorrected;
    return out;
  }
  out.decision = estimate_theta(analysis, dd.delta_hat, options.fit);
  out.corrected = corrected_estimate(dataset, out.decision, options, window, out.dropped_pairs);
  return out;
}

CorrectedPerr corrected_perr_ag_known(const CohortDataset& dataset, double delta, double theta,
                                      const PerrOptions& options,
                                      const std::optional<AnalysisWindow>& window) {
  CorrectedPerr out;
  out.uncorrected = perr_ag(windowed(dataset, window), options);
  if (delta == 0.0 || theta == 1.0) {
    out.corrected = out.uncorrected;
    return out;
  }
  out.decision.detected = true;
  out.decision.delta_hat = delta;
  out.decision.theta_hat = theta;
  out.corrected = corrected_estimate(dataset, out.decision, options, window, out.dropped_pairs);
  return out;
}

}  // namespace perr
