#include "perr/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "perr/edt.hpp"
#include "perr/errors.hpp"
#include "perr/parallel.hpp"
#include "perr/perr_estimators.hpp"

namespace perr {

std::string to_string(ConfounderKind k) {
  return k == ConfounderKind::binary_half ? "binary_half" : "gamma_4_quarter";
}

ConfounderKind parse_confounder(const std::string& text) {
  if (text == "binary_half") return ConfounderKind::binary_half;
  if (text == "gamma_4_quarter") return ConfounderKind::gamma_4_quarter;
  throw DataError("unknown confounder kind '" + text + "'");
}

double ScenarioSpec::true_hr() const { return std::exp(beta); }

void validate_spec(const ScenarioSpec& s) {
  auto fail = [&](const std::string& what) { throw DataError("scenario '" + s.name + "': " + what); };
  if (s.n_prematch < 2) fail("n_prematch must be at least 2");
  if (!(s.kappa1 > 0.0) || !(s.kappa2 > 0.0)) fail("Weibull shapes must be positive");
  if (!(s.tau_min < s.tau_max) || !(s.tau_min > 0.0)) fail("tau range must satisfy 0 < min < max");
  if (s.replicates < 1) fail("replicates must be at least 1");
  if (!(s.sigma_omega_sq >= 0.0) || !(s.epsilon_var >= 0.0)) fail("variances must be nonnegative");
  if (!(s.theta > 0.0)) fail("theta must be positive");
  if (s.theta_second && !(*s.theta_second > 0.0)) fail("theta_second must be positive");
  if (!(s.delta >= 0.0)) fail("delta must be nonnegative");
  if (s.gaps < 1 || !(s.gap_width > 0.0)) fail("gaps >= 1 and gap_width > 0 required");
  if (s.bootstrap_reps < 0) fail("bootstrap_reps must be nonnegative");
  if (s.use_true_edt && s.theta_second) fail("true-EDT correction supports a single theta only");
  if (s.min_pairs < 1) fail("min_pairs must be at least 1");
  if (s.window && !(s.window->prior_days > 0.0 && s.window->post_days > 0.0)) {
    fail("window lengths must be positive");
  }
}

double weibull_inverse(double u, double scale, double kappa, double from) {
  return std::pow(-std::log(u) / scale + std::pow(from, kappa), 1.0 / kappa);
}

double edt_update_treatment_time(double treatment_time, double event_time, const ScenarioSpec& spec) {
  const double k = spec.kappa1;
  struct Phase {
    double multiplier, length;
  };
  std::vector<Phase> phases;
  if (spec.theta_second) {
    phases = {{spec.theta, spec.delta / 2.0}, {*spec.theta_second, spec.delta / 2.0}};
  } else {
    phases = {{spec.theta, spec.delta}};
  }
  // Baseline cumulative treatment hazard still owed after the event (h_i0 cancels).
  double remaining = std::pow(treatment_time, k) - std::pow(event_time, k);
  double lo = event_time;
  for (const auto& ph : phases) {
    const double hi = lo + ph.length;
    const double capacity = ph.multiplier * (std::pow(hi, k) - std::pow(lo, k));
    if (remaining <= capacity) return std::pow(remaining / ph.multiplier + std::pow(lo, k), 1.0 / k);
    remaining -= capacity;
    lo = hi;
  }
  return std::pow(remaining + std::pow(lo, k), 1.0 / k);
}

SimulatedPerson draw_participant(const ScenarioSpec& spec, Rng& rng, std::string id) {
  SimulatedPerson s;
  s.tau = rng.uniform(spec.tau_min, spec.tau_max);
  s.x = spec.confounder == ConfounderKind::binary_half ? (rng.bernoulli(0.5) ? 1.0 : 0.0)
                                                       : std::log(rng.gamma(4.0, 0.25));
  s.z = rng.bernoulli(0.5) ? 1 : 0;
  s.epsilon = rng.normal(0.0, std::sqrt(spec.epsilon_var));
  s.w = rng.normal(0.0, std::sqrt(spec.sigma_omega_sq));

  const double h0 = std::exp(spec.c0 + spec.alpha1 * s.x + spec.z_effect * s.z + s.epsilon);
  const double lambda_untreated =
      0.5 * std::exp(spec.beta0 + spec.alpha2 * s.x + spec.z_effect * s.z + s.w);
  const double lambda_treated = lambda_untreated * std::exp(spec.beta);
  const bool edt = spec.has_edt();

  double t_trt = weibull_inverse(rng.uniform_open(), h0, spec.kappa1, 0.0);
  std::vector<double> events;
  double last = 0.0;
  while (true) {
    const bool on_treatment = t_trt <= last;
    double t = weibull_inverse(rng.uniform_open(), on_treatment ? lambda_treated : lambda_untreated,
                               spec.kappa2, last);
    if (t < t_trt) {
      if (edt) t_trt = edt_update_treatment_time(t_trt, t, spec);
    } else if (last < t_trt) {
      // Treatment started before this candidate event: redraw it under P = 1,
      // left-truncated at the treatment time.
      t = weibull_inverse(rng.uniform_open(), lambda_treated, spec.kappa2, t_trt);
    }
    if (t > s.tau) break;
    events.push_back(t);
    last = t;
  }

  s.treatment_time = t_trt;
  s.treated = t_trt < s.tau;
  auto& p = s.participant;
  p.id = std::move(id);
  p.group = s.treated ? Group::treated : Group::control;
  p.prior_start = 0.0;
  p.index_time = s.treated ? t_trt : s.tau;
  p.end_time = s.tau;
  p.covariates["Z"] = std::to_string(s.z);
  p.event_times = std::move(events);
  return s;
}

CohortDataset draw_population(const ScenarioSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  CohortDataset ds;
  ds.participants.reserve(static_cast<std::size_t>(spec.n_prematch));
  for (int i = 0; i < spec.n_prematch; ++i) {
    ds.participants.push_back(draw_participant(spec, rng, "p" + std::to_string(i + 1)).participant);
  }
  return ds;
}

SimulatedCohort assemble_matched_cohort(const ScenarioSpec& spec, std::uint64_t seed) {
  static const std::vector<std::string> keys{"Z"};
  SimulatedCohort out;
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t draw_seed =
        attempt == 0 ? seed : derive_seed(seed, 0x5eed, static_cast<std::uint64_t>(attempt));
    const CohortDataset pop = draw_population(spec, draw_seed);
    std::vector<Participant> treated, pool;
    for (const auto& p : pop.participants) (p.is_treated() ? treated : pool).push_back(p);
    MatchResult m = match_controls(treated, pool, keys, {MatchRule::random, derive_seed(draw_seed, 0x3a7c)});
    if (m.report.pairs >= static_cast<std::size_t>(spec.min_pairs)) {
      out.dataset = std::move(m.dataset);
      out.prematch_treated = treated.size();
      out.prematch_controls = pool.size();
      out.redraws = attempt;
      return out;
    }
    if (attempt >= 1000) throw DataError("scenario '" + spec.name + "' cannot produce enough matched pairs");
  }
}

namespace {

ReplicateEstimate from(const PerrEstimate& e) { return {e.perr_hr, e.ci_low, e.ci_high}; }

template <typename F>
void guarded(ReplicateRecord& rec, F&& f) {
  try {
    f();
  } catch (const std::runtime_error& e) {
    if (rec.error.empty()) rec.error = e.what();
  }
}

}  // namespace

ReplicateRecord run_replicate(const ScenarioSpec& spec, std::size_t index) {
  ReplicateRecord rec;
  rec.index = index;
  rec.seed = derive_seed(spec.seed, index);
  const SimulatedCohort cohort = assemble_matched_cohort(spec, rec.seed);
  const CohortDataset& full = cohort.dataset;
  const CohortDataset ds = spec.window ? restrict_window(full, *spec.window).dataset : full;
  rec.cohort_redraws = cohort.redraws;
  rec.matched_size = full.participants.size();

  if (spec.run_original) {
    guarded(rec, [&] {
      if (spec.bootstrap_reps > 0) {
        rec.original = from(perr_original(ds, spec.bootstrap_reps, derive_seed(rec.seed, 0xB0075), {}, 1));
      } else {
        const auto pt = perr_original_point(ds);
        rec.original.estimate = std::exp(pt.log_hr_post - pt.log_hr_prior);
      }
    });
  }
  if (spec.run_cox) guarded(rec, [&] { rec.cox = from(perr_cox(ds)); });
  if (spec.run_edt) {
    guarded(rec, [&] {
      const CorrectedPerr c = spec.use_true_edt
                                  ? corrected_perr_ag_known(full, spec.delta, spec.theta, {}, spec.window)
                                  : corrected_perr_ag(full, spec.gaps, spec.gap_width, {}, spec.window);
      rec.ag = from(c.uncorrected);
      rec.corrected = from(c.corrected);
      rec.detected = c.decision.detected;
      rec.delta_hat = c.decision.delta_hat;
      if (c.decision.theta_hat) rec.theta_hat = *c.decision.theta_hat;
      rec.dropped_pairs = c.dropped_pairs;
    });
  } else if (spec.run_ag) {
    guarded(rec, [&] { rec.ag = from(perr_ag(ds)); });
  }
  return rec;
}

const EstimatorSummary* SimSummary::find(const std::string& name) const {
  for (const auto& e : estimators) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

SimSummary summarize(const ScenarioSpec& spec, const std::vector<ReplicateRecord>& records) {
  SimSummary s;
  s.scenario = spec.name;
  s.seed = spec.seed;
  s.replicates = records.size();
  s.true_hr = spec.true_hr();
  double size_sum = 0.0;
  for (const auto& r : records) {
    s.failures += r.error.empty() ? 0 : 1;
    s.cohort_redraws += static_cast<std::size_t>(r.cohort_redraws);
    size_sum += static_cast<double>(r.matched_size);
  }
  s.mean_matched_size = records.empty() ? 0.0 : size_sum / static_cast<double>(records.size());

  auto aggregate = [&](const std::string& name, ReplicateEstimate ReplicateRecord::*field) {
    EstimatorSummary e;
    e.name = name;
    double sum = 0.0, sq = 0.0;
    std::size_t with_ci = 0, covered = 0;
    for (const auto& r : records) {
      const auto& v = r.*field;
      if (!v.ok()) continue;
      ++e.n;
      sum += v.estimate;
      sq += (v.estimate - s.true_hr) * (v.estimate - s.true_hr);
      if (v.ci_low == v.ci_low && v.ci_high == v.ci_high) {
        ++with_ci;
        covered += (v.ci_low <= s.true_hr && s.true_hr <= v.ci_high) ? 1 : 0;
      }
    }
    if (e.n > 0) {
      e.mean = sum / static_cast<double>(e.n);
      e.rmse = std::sqrt(sq / static_cast<double>(e.n));
    }
    if (with_ci > 0) e.cp = 100.0 * static_cast<double>(covered) / static_cast<double>(with_ci);
    s.estimators.push_back(e);
  };
  if (spec.run_original) aggregate("original", &ReplicateRecord::original);
  if (spec.run_cox) aggregate("cox", &ReplicateRecord::cox);
  if (spec.run_ag || spec.run_edt) aggregate("ag", &ReplicateRecord::ag);
  if (spec.run_edt) aggregate("ag_corrected", &ReplicateRecord::corrected);

  if (spec.run_edt && !spec.use_true_edt) {
    EdtSummary e;
    std::size_t n = 0, exact = 0, within = 0, n_exact = 0, n_within = 0;
    double th_exact = 0.0, th_within = 0.0, th_all = 0.0;
    for (const auto& r : records) {
      if (!r.corrected.ok()) continue;
      ++n;
      const bool is_exact = std::abs(r.delta_hat - spec.delta) < 1e-9;
      const bool is_within = std::abs(r.delta_hat - spec.delta) <= spec.gap_width + 1e-9;
      exact += is_exact;
      within += is_within;
      if (r.detected && r.theta_hat == r.theta_hat) {
        ++e.detected;
        th_all += r.theta_hat;
        if (is_exact) {
          ++n_exact;
          th_exact += r.theta_hat;
        }
        if (is_within) {
          ++n_within;
          th_within += r.theta_hat;
        }
      }
    }
    if (n > 0) {
      e.p_exact = 100.0 * static_cast<double>(exact) / static_cast<double>(n);
      e.p_within = 100.0 * static_cast<double>(within) / static_cast<double>(n);
    }
    if (n_exact > 0) e.mean_theta_exact = th_exact / static_cast<double>(n_exact);
    if (n_within > 0) e.mean_theta_within = th_within / static_cast<double>(n_within);
    if (e.detected > 0) e.mean_theta = th_all / static_cast<double>(e.detected);
    s.edt = e;
  }
  return s;
}

ScenarioRun run_scenario(const ScenarioSpec& spec, int threads) {
  validate_spec(spec);
  ScenarioRun run;
  run.replicates.resize(static_cast<std::size_t>(spec.replicates));
  parallel_for(run.replicates.size(), threads,
               [&](std::size_t i) { run.replicates[i] = run_replicate(spec, i); });
  run.summary = summarize(spec, run.replicates);
  return run;
}

}  // namespace perr
