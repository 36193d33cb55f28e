#include "perr/perr_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "perr/counting_process.hpp"
#include "perr/errors.hpp"
#include "perr/parallel.hpp"
#include "perr/rng.hpp"

namespace perr {

std::string to_string(PerrMethod m) {
  switch (m) {
    case PerrMethod::original: return "original";
    case PerrMethod::cox_interaction: return "cox";
    case PerrMethod::ag: return "ag";
  }
  return "unknown";
}

namespace {

void count_groups(const CohortDataset& ds, PerrEstimate& est) {
  for (const auto& p : ds.participants) (p.is_treated() ? est.n_treated : est.n_control)++;
}

SurvivalFrame period_rows(const SurvivalFrame& first_event, double post) {
  const std::size_t col = first_event.column("post");
  return first_event.filter([&](std::size_t i) { return first_event.x(i, col) == post; })
      .design({{"trt", {"trt"}}});
}

// Empirical quantile with linear interpolation between order statistics.
double quantile_sorted(const std::vector<double>& v, double q) {
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct FirstEventRecord {
  bool treated;
  bool has_prior, has_post;
  double prior_start, prior_stop, post_start, post_stop;
  bool prior_event, post_event;
};

FirstEventRecord first_event_record(const Participant& p) {
  FirstEventRecord r{};
  r.treated = p.is_treated();
  r.has_prior = p.prior_start < p.index_time;
  r.has_post = p.index_time < p.end_time;
  const auto pe = prior_events(p);
  const auto qe = post_events(p);
  r.prior_start = p.prior_start;
  r.prior_stop = pe.empty() ? p.index_time : pe.front();
  r.prior_event = !pe.empty();
  r.post_start = p.index_time;
  r.post_stop = qe.empty() ? p.end_time : qe.front();
  r.post_event = !qe.empty();
  return r;
}

}  // namespace

TwoModelPoint perr_original_point(const CohortDataset& dataset, const FitConfig& config) {
  FitConfig cfg = config;
  cfg.robust = false;
  const SurvivalFrame rows = build_first_event_rows(dataset);
  const FitResult prior = fit(period_rows(rows, 0.0), cfg);
  const FitResult post = fit(period_rows(rows, 1.0), cfg);
  return {prior.coefficients[0], post.coefficients[0]};
}

PerrEstimate perr_original(const CohortDataset& dataset, int bootstrap_reps, std::uint64_t seed,
                           const PerrOptions& options, int threads) {
  if (bootstrap_reps < 1) throw DataError("original PERR needs at least one bootstrap replicate");
  if (!dataset.matched) throw DataError("original PERR requires a matched dataset");

  PerrEstimate est;
  est.method = PerrMethod::original;
  est.seed = seed;
  count_groups(dataset, est);

  FitConfig cfg = options.fit;
  cfg.robust = false;
  const SurvivalFrame rows = build_first_event_rows(dataset);
  const FitResult prior = fit(period_rows(rows, 0.0), cfg);
  const FitResult post = fit(period_rows(rows, 1.0), cfg);
  const double b_prior = prior.coefficients[0];
  const double b_post = post.coefficients[0];
  est.hr_prior = std::exp(b_prior);
  est.hr_post = std::exp(b_post);
  est.perr_hr = est.hr_post / est.hr_prior;
  est.events_prior = prior.events;
  est.events_post = post.events;

  // Resampling unit: the matched pair.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  {
    std::unordered_map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < dataset.participants.size(); ++i) {
      const auto& p = dataset.participants[i];
      auto [it, fresh] = slot.emplace(p.pair_id, pairs.size());
      if (fresh) pairs.emplace_back(i, i);
      auto& pr = pairs[it->second];
      (p.is_treated() ? pr.first : pr.second) = i;
    }
  }
  std::vector<FirstEventRecord> records;
  records.reserve(dataset.participants.size());
  for (const auto& p : dataset.participants) records.push_back(first_event_record(p));

  const auto reps = static_cast<std::size_t>(bootstrap_reps);
  std::vector<double> draws(reps);
  std::vector<int> redraws(reps, 0);
  constexpr int kMaxAttempts = 1000;

  parallel_for(reps, threads, [&](std::size_t b) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      Rng rng(derive_seed(seed, b, static_cast<std::uint64_t>(attempt)));
      SurvivalFrame pre({"trt"}), pst({"trt"});
      std::size_t pre_events = 0, pst_events = 0;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& pr = pairs[rng.below(pairs.size())];
        for (std::size_t idx : {pr.first, pr.second}) {
          const auto& r = records[idx];
          const double x = r.treated ? 1.0 : 0.0;
          if (r.has_prior) {
            pre.add_row(pre.add_cluster({}), r.prior_start, r.prior_stop, r.prior_event, std::span(&x, 1));
            pre_events += r.prior_event;
          }
          if (r.has_post) {
            pst.add_row(pst.add_cluster({}), r.post_start, r.post_stop, r.post_event, std::span(&x, 1));
            pst_events += r.post_event;
          }
        }
      }
      if (pre_events == 0 || pst_events == 0) {
        ++redraws[b];
        continue;
      }
      try {
        const double lp = fit(pre, cfg).coefficients[0];
        const double lq = fit(pst, cfg).coefficients[0];
        draws[b] = lq - lp;
        return;
      } catch (const NumericalError&) {
        ++redraws[b];
      }
    }
    throw NumericalError("bootstrap replicate could not be drawn with events in both periods");
  });

  BootstrapDiagnostics diag;
  diag.replicates = bootstrap_reps;
  diag.redraws = std::accumulate(redraws.begin(), redraws.end(), 0);
  diag.warning = diag.redraws * 10 >= bootstrap_reps;
  est.bootstrap = diag;

  const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(reps);
  double ss = 0.0;
  for (double d : draws) ss += (d - mean) * (d - mean);
  est.se_log = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;

  std::sort(draws.begin(), draws.end());
  const double alpha = (1.0 - options.level) / 2.0;
  est.ci_low = std::exp(quantile_sorted(draws, alpha));
  est.ci_high = std::exp(quantile_sorted(draws, 1.0 - alpha));
  est.prior_ci = wald_ci(b_prior, prior.model_se(0), options.level);
  est.post_ci = wald_ci(b_post, post.model_se(0), options.level);
  return est;
}

PerrEstimate interaction_estimate(const SurvivalFrame& rows, PerrMethod method,
                                  const CohortDataset& dataset, const PerrOptions& options) {
  const SurvivalFrame design =
      rows.design({{"trt", {"trt"}}, {"post", {"post"}}, {"trt:post", {"trt", "post"}}});
  const FitResult f = fit(design, options.fit);

  PerrEstimate est;
  est.method = method;
  count_groups(dataset, est);
  const std::size_t post_col = rows.column("post");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows.event(i)) (rows.x(i, post_col) > 0.5 ? est.events_post : est.events_prior)++;
  }

  const double b1 = f.coefficients[0];
  const double b3 = f.coefficients[2];
  est.hr_prior = std::exp(b1);
  est.hr_post = std::exp(b1 + b3);
  est.perr_hr = est.hr_post / est.hr_prior;
  est.se_log = f.robust_se(2);
  const double z = normal_quantile_two_sided(options.level);
  est.ci_low = std::min(est.perr_hr, std::exp(b3 - z * est.se_log));
  est.ci_high = std::max(est.perr_hr, std::exp(b3 + z * est.se_log));
  est.prior_ci = wald_ci(b1, f.robust_se(0), options.level);
  const auto& V = f.robust_covariance;
  const double var_post = V(0, 0) + V(2, 2) + 2.0 * V(0, 2);
  est.post_ci = wald_ci(b1 + b3, std::sqrt(std::max(0.0, var_post)), options.level);
  return est;
}

PerrEstimate perr_cox(const CohortDataset& dataset, const PerrOptions& options) {
  return interaction_estimate(build_first_event_rows(dataset), PerrMethod::cox_interaction, dataset,
                              options);
}

PerrEstimate perr_ag(const CohortDataset& dataset, const PerrOptions& options) {
  return interaction_estimate(build_all_event_rows(dataset), PerrMethod::ag, dataset, options);
}

}  // namespace perr
