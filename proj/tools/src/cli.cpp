#include "perr/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "perr/cohort.hpp"
#include "perr/cohort_io.hpp"
#include "perr/edt.hpp"
#include "perr/errors.hpp"
#include "perr/incidence.hpp"
#include "perr/perr_estimators.hpp"
#include "perr/rng.hpp"
#include "perr/scenarios.hpp"
#include "perr/simulation.hpp"
#include "reports.hpp"

namespace perr::cli {

const char* version() { return PERR_TOOL_VERSION; }

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 20240601;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string format = "json";
  int threads = 0;
  CLI::Option* seed_opt = nullptr;
};

struct InputFlags {
  std::string cohort_dir;
  std::string participants;
  std::string events;
};

struct WindowFlags {
  double prior = AnalysisWindow{}.prior_days;
  double post = AnalysisWindow{}.post_days;
  bool none = false;

  std::optional<AnalysisWindow> get() const {
    if (none) return std::nullopt;
    return AnalysisWindow{prior, post};
  }
  std::string describe() const {
    return none ? std::string("none") : format_number(prior) + "/" + format_number(post);
  }
};

void add_common(CLI::App* sub, Common& c, bool out_required = true) {
  c.seed_opt = sub->add_option("--seed", c.seed, "Random seed recorded in every output");
  auto* out = sub->add_option("--out", c.out, "Output directory (created if missing)");
  if (out_required) out->required();
  sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

void add_input(CLI::App* sub, InputFlags& in) {
  auto* dir = sub->add_option("--cohort", in.cohort_dir, "Directory with participants.csv and events.csv");
  auto* p = sub->add_option("--participants", in.participants, "Participants CSV");
  auto* e = sub->add_option("--events", in.events, "Events CSV");
  dir->excludes(p)->excludes(e);
  p->needs(e);
  e->needs(p);
}

void add_window(CLI::App* sub, WindowFlags& w) {
  auto* a = sub->add_option("--window-prior", w.prior, "Days kept before the index time")
                ->check(CLI::PositiveNumber);
  auto* b = sub->add_option("--window-post", w.post, "Days kept after the index time")
                ->check(CLI::PositiveNumber);
  sub->add_flag("--no-window", w.none, "Analyse the full follow-up")->excludes(a)->excludes(b);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct LoadedInput {
  CohortDataset dataset;
  std::string hash;
};

LoadedInput load_input(const InputFlags& in) {
  LoadedInput r;
  fs::path participants, events;
  if (!in.cohort_dir.empty()) {
    participants = fs::path(in.cohort_dir) / "participants.csv";
    events = fs::path(in.cohort_dir) / "events.csv";
    r.dataset = read_cohort_dir(in.cohort_dir);
  } else if (!in.participants.empty()) {
    participants = in.participants;
    events = in.events;
    r.dataset = read_cohort(participants, events);
  } else {
    throw UsageError("an input is required: --cohort DIR or --participants FILE --events FILE");
  }
  r.hash = hex64(fnv1a64(slurp(events), fnv1a64(slurp(participants))));
  return r;
}

std::string config_hash(const std::string& canonical) { return hex64(fnv1a64(canonical)); }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// ---------------------------------------------------------------- match

struct MatchFlags {
  Common common;
  InputFlags input;
  std::string keys;
  std::string rule = "random";
};

int cmd_match(const MatchFlags& f, std::ostream& out) {
  const auto keys = split_list(f.keys);
  if (keys.empty()) throw UsageError("--keys needs at least one covariate name");
  const MatchRule rule = parse_match_rule(f.rule);
  LoadedInput in = load_input(f.input);

  std::vector<Participant> treated, pool;
  for (auto& p : in.dataset.participants) {
    p.pair_id.clear();
    (p.is_treated() ? treated : pool).push_back(std::move(p));
  }
  if (pool.empty()) throw DataError("no eligible controls: the input has no control persons");
  if (treated.empty()) throw DataError("no treated persons to match");

  MatchResult m = match_controls(treated, pool, keys, {rule, f.common.seed});
  if (m.report.pairs == 0) {
    throw DataError("no eligible controls for any of the " + std::to_string(treated.size()) + " treated persons");
  }
  require_valid(m.dataset);

  std::string canonical = "match;keys=" + f.keys + ";rule=" + to_string(rule) + ";seed=" +
                          std::to_string(f.common.seed) + ";input=" + in.hash;
  const RunMeta meta{"match", f.common.seed, config_hash(canonical), in.hash};

  Json side = meta_json(meta);
  side["match_rule"] = to_string(rule);
  write_cohort(f.common.out, m.dataset, side.dump());

  const auto& r = m.report;
  if (f.common.format == "json") {
    Json j = meta_json(meta);
    j["keys"] = keys;
    j["match_rule"] = to_string(rule);
    j["treated_in"] = r.treated_in;
    j["pool_in"] = r.pool_in;
    j["pairs"] = r.pairs;
    j["unmatched_treated"] = r.unmatched_treated;
    j["unused_controls"] = r.unused_controls;
    Json dist = Json::object();
    for (const auto& [k, n] : r.key_distribution) dist[k] = n;
    j["key_distribution"] = std::move(dist);
    write_text(f.common.out, "match_report.json", j.dump(2) + "\n");
  } else {
    CsvBuilder csv({"item", "key", "count"}, meta);
    csv.row({"treated_in", "", std::to_string(r.treated_in)});
    csv.row({"pool_in", "", std::to_string(r.pool_in)});
    csv.row({"pairs", "", std::to_string(r.pairs)});
    csv.row({"unmatched_treated", "", std::to_string(r.unmatched_treated)});
    csv.row({"unused_controls", "", std::to_string(r.unused_controls)});
    for (const auto& [k, n] : r.key_distribution) {
      std::string key = k;
      std::replace(key.begin(), key.end(), ',', ';');
      csv.row({"pairs_by_key", key, std::to_string(n)});
    }
    write_text(f.common.out, "match_report.csv", csv.text());
  }
  out << "matched " << r.pairs << " pairs (" << r.unmatched_treated << " treated unmatched, "
      << r.unused_controls << " controls unused) -> " << f.common.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------- perr

struct PerrFlags {
  Common common;
  InputFlags input;
  WindowFlags window;
  std::string methods = "original,cox,ag";
  int bootstrap = 200;
  double level = 0.95;
};

PerrMethod parse_method(const std::string& m) {
  if (m == "original") return PerrMethod::original;
  if (m == "cox") return PerrMethod::cox_interaction;
  if (m == "ag") return PerrMethod::ag;
  throw UsageError("unknown method '" + m + "' (expected original, cox, ag)");
}

CohortDataset prepare_matched(const CohortDataset& ds) {
  if (!ds.matched) throw DataError("input is not a matched dataset (every participant needs a pair_id)");
  require_valid(ds);
  return ds;
}

int cmd_perr(const PerrFlags& f, std::ostream& out, std::ostream& err) {
  std::vector<PerrMethod> methods;
  for (const auto& m : split_list(f.methods)) methods.push_back(parse_method(m));
  if (methods.empty()) throw UsageError("--methods needs at least one method");

  LoadedInput in = load_input(f.input);
  const CohortDataset full = prepare_matched(in.dataset);
  std::vector<std::string> excluded;
  CohortDataset ds = full;
  if (auto w = f.window.get()) {
    WindowResult wr = restrict_window(full, *w);
    ds = std::move(wr.dataset);
    excluded = std::move(wr.excluded_ids);
  }
  if (ds.participants.empty()) throw DataError("no participants left after the analysis window");

  PerrOptions opts;
  opts.level = f.level;
  const std::string canonical = "perr;methods=" + f.methods + ";window=" + f.window.describe() +
                                ";bootstrap=" + std::to_string(f.bootstrap) + ";level=" +
                                format_number(f.level) + ";seed=" + std::to_string(f.common.seed) +
                                ";input=" + in.hash;
  const RunMeta meta{"perr", f.common.seed, config_hash(canonical), in.hash};

  struct Outcome {
    PerrMethod method;
    std::optional<PerrEstimate> estimate;
    std::string error;
    bool numerical = false;
  };
  std::vector<Outcome> outcomes;
  for (PerrMethod m : methods) {
    Outcome o{m, std::nullopt, {}, false};
    try {
      switch (m) {
        case PerrMethod::original:
          o.estimate = perr_original(ds, f.bootstrap, derive_seed(f.common.seed, 0xB0075), opts, f.common.threads);
          break;
        case PerrMethod::cox_interaction:
          o.estimate = perr_cox(ds, opts);
          break;
        case PerrMethod::ag:
          o.estimate = perr_ag(ds, opts);
          break;
      }
    } catch (const NumericalError& e) {
      o.error = e.what();
      o.numerical = true;
    } catch (const DataError& e) {
      o.error = e.what();
    }
    outcomes.push_back(std::move(o));
  }

  const IncidenceTable incidence = incidence_table(ds);
  std::size_t pairs = ds.participants.size() / 2;
  if (f.common.format == "json") {
    Json j = meta_json(meta);
    j["window"] = f.window.none ? Json(nullptr)
                                : Json({{"prior_days", f.window.prior}, {"post_days", f.window.post}});
    j["level"] = f.level;
    j["pairs"] = pairs;
    j["excluded_by_window"] = excluded;
    j["incidence"] = incidence_json(incidence);
    Json est = Json::array();
    for (const auto& o : outcomes) {
      if (o.estimate) {
        est.push_back(estimate_json(*o.estimate));
      } else {
        est.push_back({{"method", to_string(o.method)}, {"status", "failed"}, {"error", o.error}});
      }
    }
    j["estimates"] = std::move(est);
    write_text(f.common.out, "perr_report.json", j.dump(2) + "\n");
  } else {
    CsvBuilder csv(estimate_columns(), meta);
    for (const auto& o : outcomes) {
      if (o.estimate) {
        csv.row(estimate_cells(*o.estimate));
      } else {
        std::vector<std::string> cells(estimate_columns().size());
        cells[0] = to_string(o.method);
        cells[1] = "failed";
        std::string msg = o.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '"', '\'');
        cells.back() = msg;
        csv.row(cells);
      }
    }
    write_text(f.common.out, "perr_estimates.csv", csv.text());
    CsvBuilder inc(incidence_columns(), meta);
    incidence_csv(inc, incidence);
    write_text(f.common.out, "incidence.csv", inc.text());
  }

  bool any_ok = false, any_numerical = false;
  for (const auto& o : outcomes) {
    if (o.estimate) {
      any_ok = true;
      out << to_string(o.method) << ": PERR HR " << format_number(o.estimate->perr_hr) << " ("
          << format_number(o.estimate->ci_low) << " to " << format_number(o.estimate->ci_high) << ")\n";
    } else {
      any_numerical = any_numerical || o.numerical;
      err << to_string(o.method) << ": failed: " << o.error << "\n";
    }
  }
  if (any_ok) return kOk;
  return any_numerical ? kNumericalError : kDataError;
}

// ---------------------------------------------------------------- edt

struct EdtFlags {
  Common common;
  InputFlags input;
  WindowFlags window;
  int gaps = 0;
  double gap_width = 0.0;
  double level = 0.95;
};

int cmd_edt(const EdtFlags& f, std::ostream& out) {
  LoadedInput in = load_input(f.input);
  const CohortDataset full = prepare_matched(in.dataset);
  PerrOptions opts;
  opts.level = f.level;
  const CorrectedPerr c = corrected_perr_ag(full, f.gaps, f.gap_width, opts, f.window.get());

  const std::string canonical = "edt;gaps=" + std::to_string(f.gaps) + ";gap_width=" + format_number(f.gap_width) +
                                ";window=" + f.window.describe() + ";level=" + format_number(f.level) +
                                ";seed=" + std::to_string(f.common.seed) + ";input=" + in.hash;
  const RunMeta meta{"edt", f.common.seed, config_hash(canonical), in.hash};

  CsvBuilder profile(profile_columns(), meta);
  profile_csv(profile, c.profile);
  write_text(f.common.out, "edt_profile.csv", profile.text());

  const auto& d = c.decision;
  if (f.common.format == "json") {
    Json j = meta_json(meta);
    j["window"] = f.window.none ? Json(nullptr)
                                : Json({{"prior_days", f.window.prior}, {"post_days", f.window.post}});
    j["profile"] = profile_json(c.profile);
    Json dj;
    dj["detected"] = d.detected;
    dj["delta_hat"] = d.delta_hat;
    if (d.theta_hat) {
      dj["theta_hat"] = *d.theta_hat;
      dj["theta_se_log"] = d.theta_se_log;
    } else {
      dj["theta_hat"] = nullptr;
    }
    j["decision"] = std::move(dj);
    j["dropped_pairs"] = c.dropped_pairs;
    j["uncorrected"] = estimate_json(c.uncorrected);
    j["corrected"] = estimate_json(c.corrected);
    write_text(f.common.out, "edt_report.json", j.dump(2) + "\n");
  } else {
    auto columns = estimate_columns();
    columns.insert(columns.begin(), "estimate");
    columns.insert(columns.end(), {"detected", "delta_hat", "theta_hat", "dropped_pairs"});
    CsvBuilder csv(columns, meta);
    auto add = [&](const char* label, const PerrEstimate& e) {
      auto cells = estimate_cells(e);
      cells.insert(cells.begin(), label);
      cells.insert(cells.end(), {d.detected ? "true" : "false", csv_number(d.delta_hat),
                                 d.theta_hat ? csv_number(*d.theta_hat) : std::string(),
                                 std::to_string(c.dropped_pairs)});
      csv.row(cells);
    };
    add("uncorrected", c.uncorrected);
    add("corrected", c.corrected);
    write_text(f.common.out, "edt_report.csv", csv.text());
  }

  if (d.detected) {
    out << "EDT detected: delta_hat " << format_number(d.delta_hat) << ", theta_hat "
        << format_number(d.theta_hat.value_or(1.0)) << "\n";
  } else {
    out << "EDT not detected\n";
  }
  out << "PERR_AG uncorrected " << format_number(c.uncorrected.perr_hr) << ", corrected "
      << format_number(c.corrected.perr_hr) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
  Common common;
  std::string scenario;
  std::string config;
  int replicates = 0;
  int bootstrap = -1;
  bool export_cohort = false;
  bool timing = false;
};

std::string safe_name(std::string s) {
  for (char& ch : s) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
  }
  return s;
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
  std::vector<ScenarioSpec> specs;
  if (!f.config.empty()) {
    std::ifstream in(f.config, std::ios::binary);
    if (!in) throw DataError("cannot open " + f.config);
    specs.push_back(parse_scenario_config(in, f.config));
  } else if (!f.scenario.empty()) {
    specs = resolve_scenario(f.scenario);
  } else {
    throw UsageError("simulate needs --scenario NAME or --config FILE");
  }
  for (auto& s : specs) {
    if (f.replicates > 0) s.replicates = f.replicates;
    if (f.bootstrap >= 0) s.bootstrap_reps = f.bootstrap;
    if (f.common.seed_opt->count() > 0) s.seed = f.common.seed;
    validate_spec(s);
  }

  std::vector<std::string> sum_cols{"scenario", "estimator", "replicates", "n", "true_hr", "mean_estimate",
                                    "cp_percent", "rmse", "failures", "cohort_redraws", "mean_matched_size"};
  std::vector<std::string> edt_cols{"scenario", "replicates", "p_delta_exact", "p_delta_within_one_gap",
                                    "mean_theta_exact", "mean_theta_within", "mean_theta", "detected"};
  std::vector<std::string> rep_cols{"scenario",     "replicate",    "replicate_seed", "matched_size",
                                    "cohort_redraws", "original",   "original_low",   "original_high",
                                    "cox",          "cox_low",      "cox_high",       "ag",
                                    "ag_low",       "ag_high",      "ag_corrected",   "ag_corrected_low",
                                    "ag_corrected_high", "detected", "delta_hat",     "theta_hat",
                                    "dropped_pairs", "error"};
  Json json_runs = Json::array();
  std::string summary_csv, edt_csv, replicate_csv, timing_csv = "scenario,seconds\n";
  bool any_edt = false;

  for (const auto& spec : specs) {
    const std::string text = write_scenario_config(spec);
    const RunMeta meta{"simulate", spec.seed, config_hash(text), {}};
    write_text(f.common.out, "scenarios/" + safe_name(spec.name) + ".cfg", text);

    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioRun run = run_scenario(spec, f.common.threads);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const SimSummary& s = run.summary;

    CsvBuilder sum(sum_cols, meta);
    for (const auto& e : s.estimators) {
      sum.row({s.scenario, e.name, std::to_string(s.replicates), std::to_string(e.n), csv_number(s.true_hr),
               csv_number(e.mean), csv_number(e.cp), csv_number(e.rmse), std::to_string(s.failures),
               std::to_string(s.cohort_redraws), csv_number(s.mean_matched_size)});
    }
    CsvBuilder ed(edt_cols, meta);
    if (s.edt) {
      any_edt = true;
      ed.row({s.scenario, std::to_string(s.replicates), csv_number(s.edt->p_exact), csv_number(s.edt->p_within),
              csv_number(s.edt->mean_theta_exact), csv_number(s.edt->mean_theta_within),
              csv_number(s.edt->mean_theta), std::to_string(s.edt->detected)});
    }
    CsvBuilder reps(rep_cols, meta);
    for (const auto& r : run.replicates) {
      std::string error = r.error;
      std::replace(error.begin(), error.end(), ',', ';');
      std::replace(error.begin(), error.end(), '"', '\'');
      std::replace(error.begin(), error.end(), '\n', ' ');
      reps.row({spec.name, std::to_string(r.index), std::to_string(r.seed), std::to_string(r.matched_size),
                std::to_string(r.cohort_redraws), csv_number(r.original.estimate), csv_number(r.original.ci_low),
                csv_number(r.original.ci_high), csv_number(r.cox.estimate), csv_number(r.cox.ci_low),
                csv_number(r.cox.ci_high), csv_number(r.ag.estimate), csv_number(r.ag.ci_low),
                csv_number(r.ag.ci_high), csv_number(r.corrected.estimate), csv_number(r.corrected.ci_low),
                csv_number(r.corrected.ci_high), r.detected ? "true" : "false", csv_number(r.delta_hat),
                csv_number(r.theta_hat), std::to_string(r.dropped_pairs), error});
    }
    // Header once per file; later scenarios append rows only.
    auto append = [](std::string& acc, const std::string& block) {
      acc += acc.empty() ? block : block.substr(block.find('\n') + 1);
    };
    append(summary_csv, sum.text());
    append(edt_csv, ed.text());
    append(replicate_csv, reps.text());

    Json j = meta_json(meta);
    j["summary"] = summary_json(s);
    json_runs.push_back(std::move(j));
    timing_csv += spec.name + "," + format_number(seconds) + "\n";

    if (f.export_cohort) {
      const std::uint64_t seed0 = derive_seed(spec.seed, 0);
      Json side = meta_json(meta);
      side["scenario"] = spec.name;
      side["replicate"] = 0;
      const std::string base = "cohorts/" + safe_name(spec.name);
      write_cohort(fs::path(f.common.out) / base / "population", draw_population(spec, seed0), side.dump());
      write_cohort(fs::path(f.common.out) / base / "matched", assemble_matched_cohort(spec, seed0).dataset,
                   side.dump());
    }

    out << spec.name << ": " << s.replicates << " replicates";
    for (const auto& e : s.estimators) out << ", " << e.name << " " << format_number(e.mean);
    out << "\n";
  }

  if (f.common.format == "json") {
    write_text(f.common.out, "summary.json", json_runs.dump(2) + "\n");
  } else {
    write_text(f.common.out, "summary.csv", summary_csv);
    if (any_edt) write_text(f.common.out, "edt_summary.csv", edt_csv);
  }
  write_text(f.common.out, "replicates.csv", replicate_csv);
  if (f.timing) write_text(f.common.out, "timing.csv", timing_csv);
  return kOk;
}

// ---------------------------------------------------------------- presets

struct PresetFlags {
  std::string format = "csv";
  std::string show;
};

int cmd_presets(const PresetFlags& f, std::ostream& out) {
  if (!f.show.empty()) {
    for (const auto& s : resolve_scenario(f.show)) out << write_scenario_config(s) << "\n";
    return kOk;
  }
  if (f.format == "json") {
    Json j;
    j["tool"] = "perr";
    j["version"] = version();
    Json groups = Json::array();
    for (const auto& g : preset_groups()) {
      groups.push_back({{"name", g.name}, {"description", g.description}, {"members", g.members}});
    }
    j["groups"] = std::move(groups);
    Json presets = Json::array();
    for (const auto& s : scenario_presets()) {
      presets.push_back({{"name", s.name}, {"description", s.description},
                         {"config_hash", config_hash(write_scenario_config(s))}});
    }
    j["presets"] = std::move(presets);
    out << j.dump(2) << "\n";
  } else {
    out << "name\tdescription\n";
    for (const auto& s : scenario_presets()) out << s.name << "\t" << s.description << "\n";
    out << "\ngroup\tmembers\n";
    for (const auto& g : preset_groups()) out << g.name << "\t" << g.members.size() << " presets\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prior event rate ratio analysis and simulation", "perr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  MatchFlags match;
  auto* match_cmd = app.add_subcommand("match", "Match treated persons 1:1 to controls still under follow-up");
  add_input(match_cmd, match.input);
  match_cmd->add_option("--keys", match.keys, "Comma-separated matching covariates")->required();
  match_cmd->add_option("--match-rule", match.rule, "random or closest_end")
      ->check(CLI::IsMember({"random", "closest_end"}));
  add_common(match_cmd, match.common);

  PerrFlags perr;
  auto* perr_cmd = app.add_subcommand("perr", "Estimate the PERR hazard ratio on a matched cohort");
  add_input(perr_cmd, perr.input);
  add_window(perr_cmd, perr.window);
  perr_cmd->add_option("--methods", perr.methods, "Comma-separated: original, cox, ag");
  perr_cmd->add_option("--bootstrap", perr.bootstrap, "Bootstrap replicates for the original PERR")
      ->check(CLI::PositiveNumber);
  perr_cmd->add_option("--level", perr.level, "Confidence level")->check(CLI::Range(0.5, 0.999999));
  add_common(perr_cmd, perr.common);

  EdtFlags edt;
  auto* edt_cmd = app.add_subcommand("edt", "Detect and correct event-dependent treatment");
  add_input(edt_cmd, edt.input);
  add_window(edt_cmd, edt.window);
  edt_cmd->add_option("--gaps", edt.gaps, "Number of sub-periods before the index time")
      ->required()
      ->check(CLI::PositiveNumber);
  edt_cmd->add_option("--gap-width", edt.gap_width, "Width of each sub-period in days")
      ->required()
      ->check(CLI::PositiveNumber);
  edt_cmd->add_option("--level", edt.level, "Confidence level")->check(CLI::Range(0.5, 0.999999));
  add_common(edt_cmd, edt.common);

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation scenario or preset group");
  auto* scen = sim_cmd->add_option("--scenario", sim.scenario, "Preset or group name (see `perr presets`)");
  auto* cfg = sim_cmd->add_option("--config", sim.config, "Scenario config file (key = value)");
  scen->excludes(cfg);
  sim_cmd->add_option("--replicates", sim.replicates, "Override the replicate count")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--bootstrap", sim.bootstrap, "Override bootstrap replicates (0 = point estimate only)")
      ->check(CLI::NonNegativeNumber);
  sim_cmd->add_flag("--export-cohort", sim.export_cohort, "Also write the first replicate's cohorts");
  sim_cmd->add_flag("--timing", sim.timing, "Write wall-clock timing to timing.csv");
  add_common(sim_cmd, sim.common);

  PresetFlags presets;
  auto* presets_cmd = app.add_subcommand("presets", "List simulation presets and groups");
  presets_cmd->add_option("--format", presets.format, "Listing format")->check(CLI::IsMember({"json", "csv"}));
  presets_cmd->add_option("--show", presets.show, "Print the config of a preset or group");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*match_cmd) return cmd_match(match, out);
    if (*perr_cmd) return cmd_perr(perr, out, err);
    if (*edt_cmd) return cmd_edt(edt, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*presets_cmd) return cmd_presets(presets, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace perr::cli
