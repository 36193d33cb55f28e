#include "perr/cohort_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "perr/errors.hpp"

namespace perr {
namespace {

std::string location(const std::string& src, std::size_t line, std::size_t col) {
  return src + ":" + std::to_string(line) + ":" + std::to_string(col);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const auto comma = line.find(',', begin);
    out.push_back(line.substr(begin, comma == std::string::npos ? std::string::npos : comma - begin));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable CsvTable::parse(std::istream& in, const std::string& source_name) {
  CsvTable t;
  t.source_ = source_name;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty()) continue;
    if (line.find('"') != std::string::npos) {
      throw DataError(location(source_name, lineno, line.find('"') + 1) +
                      ": quoted fields are not supported");
    }
    auto fields = split_line(line);
    if (!have_header) {
      t.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header_.size()) {
      throw DataError(location(source_name, lineno, std::min(fields.size(), t.header_.size()) + 1) +
                      ": expected " + std::to_string(t.header_.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    t.cells_.push_back(std::move(fields));
    t.lines_.push_back(lineno);
  }
  if (!have_header) throw DataError(source_name + ": missing header row");
  return t;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse(in, path.string());
}

std::optional<std::size_t> CsvTable::find_column(const std::string& name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header_.begin());
}

std::size_t CsvTable::require_column(const std::string& name) const {
  auto col = find_column(name);
  if (!col) throw DataError(source_ + ":1: missing required column '" + name + "'");
  return *col;
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& text = cells_[row][col];
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw DataError(location(source_, lines_[row], col + 1) + ": column '" + header_[col] +
                    "' expects a number, found '" + text + "'");
  }
  return v;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

CohortDataset read_cohort(const std::filesystem::path& participants_csv,
                          const std::filesystem::path& events_csv) {
  const CsvTable pt = CsvTable::read(participants_csv);
  const std::size_t c_id = pt.require_column("id");
  const std::size_t c_group = pt.require_column("group");
  const std::optional<std::size_t> c_pair = pt.find_column("pair_id");
  const std::size_t c_a = pt.require_column("prior_start");
  const std::size_t c_b = pt.require_column("index_time");
  const std::size_t c_c = pt.require_column("end_time");
  std::set<std::size_t> fixed{c_id, c_group, c_a, c_b, c_c};
  if (c_pair) fixed.insert(*c_pair);

  CohortDataset ds;
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t r = 0; r < pt.rows(); ++r) {
    Participant p;
    p.id = pt.cell(r, c_id);
    if (p.id.empty()) {
      throw DataError(location(pt.source(), pt.line_of(r), c_id + 1) + ": empty id");
    }
    try {
      p.group = parse_group(pt.cell(r, c_group));
    } catch (const DataError& e) {
      throw DataError(location(pt.source(), pt.line_of(r), c_group + 1) + ": " + e.what());
    }
    if (c_pair) p.pair_id = pt.cell(r, *c_pair);
    p.prior_start = pt.number(r, c_a);
    p.end_time = pt.number(r, c_c);
    // Unmatched pool controls may leave index_time blank.
    if (pt.cell(r, c_b).empty() && !p.is_treated()) {
      p.index_time = p.end_time;
    } else {
      p.index_time = pt.number(r, c_b);
    }
    for (std::size_t c = 0; c < pt.header().size(); ++c) {
      if (!fixed.contains(c)) p.covariates[pt.header()[c]] = pt.cell(r, c);
    }
    if (!by_id.emplace(p.id, ds.participants.size()).second) {
      throw DataError(location(pt.source(), pt.line_of(r), c_id + 1) + ": duplicate id '" + p.id + "'");
    }
    ds.participants.push_back(std::move(p));
  }

  const CsvTable et = CsvTable::read(events_csv);
  const std::size_t e_id = et.require_column("id");
  const std::size_t e_time = et.require_column("time");
  for (std::size_t r = 0; r < et.rows(); ++r) {
    auto it = by_id.find(et.cell(r, e_id));
    if (it == by_id.end()) {
      throw DataError(location(et.source(), et.line_of(r), e_id + 1) + ": unknown participant id '" +
                      et.cell(r, e_id) + "'");
    }
    ds.participants[it->second].event_times.push_back(et.number(r, e_time));
  }
  for (auto& p : ds.participants) std::sort(p.event_times.begin(), p.event_times.end());

  ds.matched = std::all_of(ds.participants.begin(), ds.participants.end(),
                           [](const Participant& p) { return !p.pair_id.empty(); }) &&
               !ds.participants.empty();
  return ds;
}

namespace {

std::vector<std::string> covariate_columns(const CohortDataset& ds) {
  std::set<std::string> names;
  for (const auto& p : ds.participants) {
    for (const auto& [k, v] : p.covariates) names.insert(k);
  }
  return {names.begin(), names.end()};
}

}  // namespace

void write_participants_csv(std::ostream& out, const CohortDataset& dataset) {
  const auto covs = covariate_columns(dataset);
  out << "id,group,pair_id,prior_start,index_time,end_time";
  for (const auto& c : covs) out << ',' << c;
  out << '\n';
  for (const auto& p : dataset.participants) {
    out << p.id << ',' << to_string(p.group) << ',' << p.pair_id << ','
        << format_number(p.prior_start) << ',' << format_number(p.index_time) << ','
        << format_number(p.end_time);
    for (const auto& c : covs) {
      auto it = p.covariates.find(c);
      out << ',' << (it == p.covariates.end() ? "" : it->second);
    }
    out << '\n';
  }
}

void write_events_csv(std::ostream& out, const CohortDataset& dataset) {
  out << "id,time\n";
  for (const auto& p : dataset.participants) {
    for (double t : p.event_times) out << p.id << ',' << format_number(t) << '\n';
  }
}

void write_cohort(const std::filesystem::path& dir, const CohortDataset& dataset,
                  const std::string& sidecar_extra_json) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "participants.csv", std::ios::binary);
    write_participants_csv(out, dataset);
  }
  {
    std::ofstream out(dir / "events.csv", std::ios::binary);
    write_events_csv(out, dataset);
  }
  nlohmann::ordered_json side;
  side["matched"] = dataset.matched;
  side["participants"] = dataset.participants.size();
  std::size_t treated = 0;
  for (const auto& p : dataset.participants) treated += p.is_treated() ? 1 : 0;
  side["treated"] = treated;
  side["controls"] = dataset.participants.size() - treated;
  auto extra = nlohmann::ordered_json::parse(sidecar_extra_json);
  for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
  std::ofstream out(dir / "cohort.json", std::ios::binary);
  out << side.dump(2) << '\n';
}

CohortDataset read_cohort_dir(const std::filesystem::path& dir) {
  CohortDataset ds = read_cohort(dir / "participants.csv", dir / "events.csv");
  const auto sidecar = dir / "cohort.json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    try {
      const auto j = nlohmann::json::parse(in);
      ds.matched = j.value("matched", ds.matched);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(sidecar.string() + ": " + e.what());
    }
  }
  return ds;
}

}  // namespace perr
