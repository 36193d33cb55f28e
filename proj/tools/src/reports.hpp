#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perr/edt.hpp"
#include "perr/incidence.hpp"
#include "perr/perr_estimators.hpp"
#include "perr/simulation.hpp"

namespace perr::cli {

using Json = nlohmann::ordered_json;

struct RunMeta {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string input_hash;  // empty when the command has no input files
};

Json meta_json(const RunMeta& meta);

/// Empty text for non-finite values, shortest round-trip text otherwise.
std::string csv_number(double v);

/// Builds CSV text; every row carries the run metadata columns at the end.
class CsvBuilder {
 public:
  CsvBuilder(std::vector<std::string> columns, const RunMeta& meta);
  void row(std::vector<std::string> cells);
  const std::string& text() const { return text_; }

 private:
  std::size_t width_;
  std::vector<std::string> meta_cells_;
  std::string text_;
};

std::string incidence_text(const IncidenceCell& cell);
Json incidence_json(const IncidenceTable& table);
void incidence_csv(CsvBuilder& csv, const IncidenceTable& table);
std::vector<std::string> incidence_columns();

Json estimate_json(const PerrEstimate& e);
std::vector<std::string> estimate_columns();
std::vector<std::string> estimate_cells(const PerrEstimate& e);

Json profile_json(const EdtProfile& profile);
std::vector<std::string> profile_columns();
void profile_csv(CsvBuilder& csv, const EdtProfile& profile);

Json summary_json(const SimSummary& s);

/// Writes `content` to dir/name; `name` must be a plain relative path inside dir.
void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& content);

}  // namespace perr::cli
