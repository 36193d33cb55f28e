#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "perr/cohort.hpp"

namespace perr {

/// Minimal reader for the comma-separated, header-first dialect used by the
/// cohort files. Quoting is not supported; parse errors name file, line and column.
class CsvTable {
 public:
  static CsvTable parse(std::istream& in, const std::string& source_name);
  static CsvTable read(const std::filesystem::path& path);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return cells_.size(); }
  std::optional<std::size_t> find_column(const std::string& name) const;
  std::size_t require_column(const std::string& name) const;

  const std::string& cell(std::size_t row, std::size_t col) const { return cells_[row][col]; }
  double number(std::size_t row, std::size_t col) const;  // throws DataError with location
  std::size_t line_of(std::size_t row) const { return lines_[row]; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> cells_;
  std::vector<std::size_t> lines_;
};

/// Shortest round-trip decimal text for a double.
std::string format_number(double v);

/// participants.csv: id, group, [pair_id,] prior_start, index_time, end_time, <covariates...>
/// (pair_id may be absent or blank before matching)
/// events.csv: id, time
CohortDataset read_cohort(const std::filesystem::path& participants_csv,
                          const std::filesystem::path& events_csv);

void write_participants_csv(std::ostream& out, const CohortDataset& dataset);
void write_events_csv(std::ostream& out, const CohortDataset& dataset);

/// Writes participants.csv, events.csv and cohort.json (matched flag and counts) into `dir`.
void write_cohort(const std::filesystem::path& dir, const CohortDataset& dataset,
                  const std::string& sidecar_extra_json = "{}");

/// Reads `dir`/participants.csv + events.csv, honouring the matched flag in cohort.json when present.
CohortDataset read_cohort_dir(const std::filesystem::path& dir);

}  // namespace perr
