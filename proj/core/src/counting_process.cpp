#include "perr/counting_process.hpp"

#include <algorithm>
#include <array>

#include "perr/errors.hpp"

namespace perr {

SurvivalFrame::SurvivalFrame(std::vector<std::string> covariate_names)
    : names_(std::move(covariate_names)) {}

int SurvivalFrame::add_cluster(std::string label) {
  cluster_labels_.push_back(std::move(label));
  return static_cast<int>(cluster_labels_.size() - 1);
}

void SurvivalFrame::add_row(int cluster, double start, double stop, bool event,
                            std::span<const double> x) {
  if (x.size() != names_.size()) {
    throw DataError("covariate vector has wrong dimension");
  }
  if (!(start < stop)) {
    throw DataError("counting-process row requires start < stop");
  }
  start_.push_back(start);
  stop_.push_back(stop);
  event_.push_back(event ? 1 : 0);
  cluster_.push_back(cluster);
  x_.insert(x_.end(), x.begin(), x.end());
}

std::size_t SurvivalFrame::column(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("unknown covariate column '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t SurvivalFrame::event_count() const {
  return static_cast<std::size_t>(std::count(event_.begin(), event_.end(), 1));
}

CountingProcessRow SurvivalFrame::row(std::size_t i) const {
  CountingProcessRow r;
  r.cluster_id = cluster_labels_.at(static_cast<std::size_t>(cluster_[i]));
  r.start = start_[i];
  r.stop = stop_[i];
  r.event = event_[i] != 0;
  for (std::size_t j = 0; j < names_.size(); ++j) r.covariates[names_[j]] = x(i, j);
  return r;
}

std::vector<CountingProcessRow> SurvivalFrame::rows() const {
  std::vector<CountingProcessRow> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(row(i));
  return out;
}

SurvivalFrame SurvivalFrame::design(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& spec) const {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> sources;
  for (const auto& [name, factors] : spec) {
    names.push_back(name);
    std::vector<std::size_t> idx;
    for (const auto& f : factors) idx.push_back(column(f));
    sources.push_back(std::move(idx));
  }
  SurvivalFrame out(std::move(names));
  out.cluster_labels_ = cluster_labels_;
  out.start_ = start_;
  out.stop_ = stop_;
  out.event_ = event_;
  out.cluster_ = cluster_;
  const std::size_t p = sources.size();
  out.x_.resize(size() * p);
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double v = 1.0;
      for (std::size_t s : sources[j]) v *= x(i, s);
      out.x_[i * p + j] = v;
    }
  }
  return out;
}

SurvivalFrame SurvivalFrame::filter(const std::function<bool(std::size_t)>& keep) const {
  SurvivalFrame out(names_);
  out.cluster_labels_ = cluster_labels_;
  for (std::size_t i = 0; i < size(); ++i) {
    if (keep(i)) out.add_row(cluster_[i], start_[i], stop_[i], event_[i] != 0, x_row(i));
  }
  return out;
}

std::string gap_name(int m) { return "gap_" + std::to_string(m); }

SurvivalFrame build_first_event_rows(const CohortDataset& dataset) {
  SurvivalFrame frame({"trt", "post"});
  for (const auto& p : dataset.participants) {
    const int c = frame.add_cluster(p.id);
    const double trt = p.is_treated() ? 1.0 : 0.0;
    if (p.prior_start < p.index_time) {
      const auto ev = prior_events(p);
      const std::array<double, 2> x{trt, 0.0};
      frame.add_row(c, p.prior_start, ev.empty() ? p.index_time : ev.front(), !ev.empty(), x);
    }
    if (p.index_time < p.end_time) {
      const auto ev = post_events(p);
      const std::array<double, 2> x{trt, 1.0};
      frame.add_row(c, p.index_time, ev.empty() ? p.end_time : ev.front(), !ev.empty(), x);
    }
  }
  return frame;
}

namespace {

// Splits (lo, hi] at every event inside it; the closing censored piece is
// emitted only when the last event falls short of hi.
void emit_split(SurvivalFrame& frame, int cluster, double lo, double hi,
                std::span<const double> events, std::span<const double> x) {
  double cursor = lo;
  auto it = std::upper_bound(events.begin(), events.end(), lo);
  for (; it != events.end() && *it <= hi; ++it) {
    frame.add_row(cluster, cursor, *it, true, x);
    cursor = *it;
  }
  if (cursor < hi) frame.add_row(cluster, cursor, hi, false, x);
}

}  // namespace

SurvivalFrame build_all_event_rows(const CohortDataset& dataset) {
  SurvivalFrame frame({"trt", "post"});
  for (const auto& p : dataset.participants) {
    const int c = frame.add_cluster(p.id);
    const double trt = p.is_treated() ? 1.0 : 0.0;
    const std::array<double, 2> prior{trt, 0.0};
    const std::array<double, 2> post{trt, 1.0};
    if (p.prior_start < p.index_time) {
      emit_split(frame, c, p.prior_start, p.index_time, p.event_times, prior);
    }
    if (p.index_time < p.end_time) {
      emit_split(frame, c, p.index_time, p.end_time, p.event_times, post);
    }
  }
  return frame;
}

SurvivalFrame build_gap_rows(const CohortDataset& dataset, int gaps, double gap_width) {
  if (gaps < 1) throw DataError("number of sub-periods must be at least 1");
  if (!(gap_width > 0.0)) throw DataError("sub-period width must be positive");

  std::vector<std::string> names{"trt"};
  for (int m = 1; m <= gaps; ++m) names.push_back(gap_name(m));
  SurvivalFrame frame(std::move(names));

  std::vector<double> x(static_cast<std::size_t>(gaps) + 1);
  for (const auto& p : dataset.participants) {
    const int c = frame.add_cluster(p.id);
    if (!(p.prior_start < p.index_time)) continue;
    const double A = p.prior_start;
    const double B = p.index_time;
    x[0] = p.is_treated() ? 1.0 : 0.0;

    // Segment k (0 = baseline before B - M*w, k >= 1 = gap_k) spans (edge[k], edge[k+1]].
    std::vector<double> edge(static_cast<std::size_t>(gaps) + 2);
    for (int m = 0; m <= gaps; ++m) {
      edge[static_cast<std::size_t>(m) + 1] = B - (gaps - m) * gap_width;
    }
    edge[0] = A;
    for (int k = 0; k <= gaps; ++k) {
      const double lo = std::max(A, edge[static_cast<std::size_t>(k)]);
      const double hi = edge[static_cast<std::size_t>(k) + 1];
      if (!(lo < hi)) continue;
      std::fill(x.begin() + 1, x.end(), 0.0);
      if (k >= 1) x[static_cast<std::size_t>(k)] = 1.0;
      emit_split(frame, c, lo, hi, p.event_times, x);
    }
  }
  return frame;
}

}  // namespace perr
