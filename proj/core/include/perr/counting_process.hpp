#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "perr/cohort.hpp"

namespace perr {

/// One (start, stop] interval of a participant's follow-up.
struct CountingProcessRow {
  std::string cluster_id;
  double start = 0.0;
  double stop = 0.0;
  bool event = false;  // event occurs at `stop`
  std::map<std::string, double> covariates;
};

/// Column-oriented store of counting-process rows. Every fitter consumes
/// this; rows are kept in insertion order and clusters are dense indices
/// into `cluster_labels()`.
class SurvivalFrame {
 public:
  SurvivalFrame() = default;
  explicit SurvivalFrame(std::vector<std::string> covariate_names);

  /// Registers a cluster label and returns its index.
  int add_cluster(std::string label);
  void add_row(int cluster, double start, double stop, bool event, std::span<const double> x);

  std::size_t size() const noexcept { return start_.size(); }
  std::size_t dimension() const noexcept { return names_.size(); }
  std::size_t cluster_count() const noexcept { return cluster_labels_.size(); }

  double start(std::size_t i) const { return start_[i]; }
  double stop(std::size_t i) const { return stop_[i]; }
  bool event(std::size_t i) const { return event_[i] != 0; }
  int cluster(std::size_t i) const { return cluster_[i]; }
  double x(std::size_t i, std::size_t j) const { return x_[i * names_.size() + j]; }
  std::span<const double> x_row(std::size_t i) const {
    return {x_.data() + i * names_.size(), names_.size()};
  }

  const std::vector<std::string>& covariate_names() const noexcept { return names_; }
  const std::vector<std::string>& cluster_labels() const noexcept { return cluster_labels_; }
  std::size_t column(const std::string& name) const;  // throws on unknown name

  std::size_t event_count() const;
  CountingProcessRow row(std::size_t i) const;
  std::vector<CountingProcessRow> rows() const;

  /// New frame with columns picked/derived from this one. Each output column
  /// is the product of the named input columns (a single name copies it).
  SurvivalFrame design(const std::vector<std::pair<std::string, std::vector<std::string>>>& spec) const;

  /// Rows for which `keep` returns true; cluster labels are preserved.
  SurvivalFrame filter(const std::function<bool(std::size_t)>& keep) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::string> cluster_labels_;
  std::vector<double> start_, stop_;
  std::vector<unsigned char> event_;
  std::vector<int> cluster_;
  std::vector<double> x_;  // row-major, size() x dimension()
};

/// Time to first event in each period. Columns: trt, post.
/// Prior row (A, min(first prior event, B)], post row (B, min(first post event, C)];
/// the post clock is not reset.
SurvivalFrame build_first_event_rows(const CohortDataset& dataset);

/// Andersen-Gill layout: rows split at every event and at the index time.
/// Columns: trt, post.
SurvivalFrame build_all_event_rows(const CohortDataset& dataset);

/// Prior period only, partitioned at B - m*gap_width for m = M..1 and at
/// every event. Columns: trt, gap_1..gap_M where gap_M is the sub-period
/// immediately before the index time.
SurvivalFrame build_gap_rows(const CohortDataset& dataset, int gaps, double gap_width);

/// Standard covariate name for the m-th sub-period indicator (1-based).
std::string gap_name(int m);

}  // namespace perr
