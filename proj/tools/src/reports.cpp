#include "reports.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "perr/cohort_io.hpp"
#include "perr/errors.hpp"
#include "perr/cli.hpp"

namespace perr::cli {

Json meta_json(const RunMeta& meta) {
  Json j;
  j["tool"] = "perr";
  j["version"] = version();
  j["command"] = meta.command;
  j["seed"] = meta.seed;
  j["config_hash"] = meta.config_hash;
  if (!meta.input_hash.empty()) j["input_hash"] = meta.input_hash;
  return j;
}

std::string csv_number(double v) { return std::isfinite(v) ? format_number(v) : std::string(); }

CsvBuilder::CsvBuilder(std::vector<std::string> columns, const RunMeta& meta)
    : width_(columns.size()),
      meta_cells_{version(), std::to_string(meta.seed), meta.config_hash} {
  columns.insert(columns.end(), {"tool_version", "seed", "config_hash"});
  for (std::size_t i = 0; i < columns.size(); ++i) text_ += (i ? "," : "") + columns[i];
  text_ += '\n';
}

void CsvBuilder::row(std::vector<std::string> cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
  cells.insert(cells.end(), meta_cells_.begin(), meta_cells_.end());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].find_first_of(",\n\"") != std::string::npos) {
      throw DataError("value not representable in the CSV dialect: '" + cells[i] + "'");
    }
    text_ += (i ? "," : "") + cells[i];
  }
  text_ += '\n';
}

std::string incidence_text(const IncidenceCell& cell) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.2f (%zu/%.0f)", cell.rate(), cell.events, cell.person_years);
  return buf;
}

namespace {

Json cell_json(const IncidenceCell& c) {
  Json j;
  j["events"] = c.events;
  j["person_years"] = c.person_years;
  j["rate"] = c.rate();
  j["text"] = incidence_text(c);
  return j;
}

Json interval_json(const Interval& i) { return Json::array({i.low, i.high}); }

}  // namespace

Json incidence_json(const IncidenceTable& t) {
  Json j;
  j["unit"] = "events per person-year";
  j["post"] = {{"treated", cell_json(t.treated_post)}, {"control", cell_json(t.control_post)}};
  j["prior"] = {{"treated", cell_json(t.treated_prior)}, {"control", cell_json(t.control_prior)}};
  return j;
}

std::vector<std::string> incidence_columns() {
  return {"period", "group", "events", "person_years", "rate", "text"};
}

void incidence_csv(CsvBuilder& csv, const IncidenceTable& t) {
  auto add = [&](const char* period, const char* group, const IncidenceCell& c) {
    csv.row({period, group, std::to_string(c.events), csv_number(c.person_years), csv_number(c.rate()),
             incidence_text(c)});
  };
  add("post", "treated", t.treated_post);
  add("post", "control", t.control_post);
  add("prior", "treated", t.treated_prior);
  add("prior", "control", t.control_prior);
}

Json estimate_json(const PerrEstimate& e) {
  Json j;
  j["method"] = to_string(e.method);
  j["status"] = "ok";
  j["hr_prior"] = e.hr_prior;
  j["hr_prior_ci"] = interval_json(e.prior_ci);
  j["hr_post"] = e.hr_post;
  j["hr_post_ci"] = interval_json(e.post_ci);
  j["perr_hr"] = e.perr_hr;
  j["perr_ci"] = Json::array({e.ci_low, e.ci_high});
  j["se_log_perr"] = e.se_log;
  j["n_treated"] = e.n_treated;
  j["n_control"] = e.n_control;
  j["events_prior"] = e.events_prior;
  j["events_post"] = e.events_post;
  if (e.bootstrap) {
    j["bootstrap"] = {{"replicates", e.bootstrap->replicates},
                      {"redraws", e.bootstrap->redraws},
                      {"warning", e.bootstrap->warning}};
  }
  if (e.seed) j["bootstrap_seed"] = *e.seed;
  return j;
}

std::vector<std::string> estimate_columns() {
  return {"method",      "status",       "hr_prior", "hr_prior_low", "hr_prior_high", "hr_post",
          "hr_post_low", "hr_post_high", "perr_hr",  "perr_low",     "perr_high",     "se_log_perr",
          "n_treated",   "n_control",    "events_prior", "events_post", "error"};
}

std::vector<std::string> estimate_cells(const PerrEstimate& e) {
  return {to_string(e.method),          "ok",
          csv_number(e.hr_prior),       csv_number(e.prior_ci.low),
          csv_number(e.prior_ci.high),  csv_number(e.hr_post),
          csv_number(e.post_ci.low),    csv_number(e.post_ci.high),
          csv_number(e.perr_hr),        csv_number(e.ci_low),
          csv_number(e.ci_high),        csv_number(e.se_log),
          std::to_string(e.n_treated),  std::to_string(e.n_control),
          std::to_string(e.events_prior), std::to_string(e.events_post),
          ""};
}

Json profile_json(const EdtProfile& p) {
  Json j;
  j["gaps"] = p.gaps;
  j["gap_width"] = p.gap_width;
  Json rows = Json::array();
  for (const auto& g : p.per_gap) {
    Json r;
    r["gap"] = g.gap;
    r["from"] = g.from;
    r["to"] = g.to;
    r["estimable"] = g.estimable;
    if (g.estimable) {
      r["log_theta"] = g.estimate;
      r["theta"] = std::exp(g.estimate);
      r["se"] = g.se;
      r["z"] = g.z;
      r["significant"] = std::abs(g.z) >= kSignificanceZ;
    }
    rows.push_back(std::move(r));
  }
  j["per_gap"] = std::move(rows);
  return j;
}

std::vector<std::string> profile_columns() {
  return {"gap", "from", "to", "estimable", "log_theta", "theta", "se", "z", "significant"};
}

void profile_csv(CsvBuilder& csv, const EdtProfile& p) {
  for (const auto& g : p.per_gap) {
    if (g.estimable) {
      csv.row({std::to_string(g.gap), csv_number(g.from), csv_number(g.to), "true", csv_number(g.estimate),
               csv_number(std::exp(g.estimate)), csv_number(g.se), csv_number(g.z),
               std::abs(g.z) >= kSignificanceZ ? "true" : "false"});
    } else {
      csv.row({std::to_string(g.gap), csv_number(g.from), csv_number(g.to), "false", "", "", "", "", "false"});
    }
  }
}

Json summary_json(const SimSummary& s) {
  Json j;
  j["scenario"] = s.scenario;
  j["seed"] = s.seed;
  j["replicates"] = s.replicates;
  j["failures"] = s.failures;
  j["cohort_redraws"] = s.cohort_redraws;
  j["true_hr"] = s.true_hr;
  j["mean_matched_size"] = s.mean_matched_size;
  Json est = Json::array();
  for (const auto& e : s.estimators) {
    est.push_back({{"estimator", e.name}, {"n", e.n}, {"mean_estimate", e.mean}, {"cp_percent", e.cp},
                   {"rmse", e.rmse}});
  }
  j["estimators"] = std::move(est);
  if (s.edt) {
    j["edt"] = {{"p_delta_exact", s.edt->p_exact},
                {"p_delta_within_one_gap", s.edt->p_within},
                {"mean_theta_exact", s.edt->mean_theta_exact},
                {"mean_theta_within", s.edt->mean_theta_within},
                {"mean_theta", s.edt->mean_theta},
                {"detected", s.edt->detected}};
  }
  return j;
}

void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  const std::filesystem::path rel(name);
  if (rel.is_absolute() || rel.lexically_normal().string().starts_with("..")) {
    throw std::logic_error("refusing to write outside the output directory: " + name);
  }
  const auto path = dir / rel;
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace perr::cli
