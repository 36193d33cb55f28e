#include "perr/cohort.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "perr/errors.hpp"

namespace perr {

std::string to_string(Group g) { return g == Group::treated ? "treated" : "control"; }

Group parse_group(const std::string& text) {
  if (text == "treated" || text == "1" || text == "trt") return Group::treated;
  if (text == "control" || text == "0" || text == "ctl") return Group::control;
  throw DataError("unknown group '" + text + "' (expected treated/control)");
}

std::span<const double> prior_events(const Participant& p) {
  const auto& ev = p.event_times;
  auto lo = std::upper_bound(ev.begin(), ev.end(), p.prior_start);
  auto hi = std::upper_bound(lo, ev.end(), p.index_time);
  return {lo, hi};
}

std::span<const double> post_events(const Participant& p) {
  const auto& ev = p.event_times;
  auto lo = std::upper_bound(ev.begin(), ev.end(), p.index_time);
  auto hi = std::upper_bound(lo, ev.end(), p.end_time);
  return {lo, hi};
}

std::vector<Violation> validate(const CohortDataset& dataset) {
  std::vector<Violation> out;
  std::unordered_set<std::string> seen;

  for (const auto& p : dataset.participants) {
    if (!seen.insert(p.id).second) {
      out.push_back({p.id, ViolationKind::duplicate_id, "duplicate id"});
    }
    if (!(p.prior_start <= p.index_time && p.index_time <= p.end_time)) {
      std::ostringstream msg;
      msg << "span order violated: A=" << p.prior_start << " B=" << p.index_time
          << " C=" << p.end_time;
      out.push_back({p.id, ViolationKind::span_order, msg.str()});
    }
    for (std::size_t k = 0; k < p.event_times.size(); ++k) {
      const double t = p.event_times[k];
      if (k > 0 && !(p.event_times[k - 1] < t)) {
        out.push_back({p.id, ViolationKind::event_order, "event times not strictly increasing"});
      }
      if (!(p.prior_start < t && t <= p.end_time)) {
        std::ostringstream msg;
        msg << "event not in (A,B] or (B,C]: t=" << t;
        out.push_back({p.id, ViolationKind::event_out_of_span, msg.str()});
      }
    }
  }

  if (!dataset.matched) return out;

  struct Slot {
    std::vector<const Participant*> treated, control;
  };
  std::unordered_map<std::string, Slot> pairs;
  for (const auto& p : dataset.participants) {
    if (p.pair_id.empty()) {
      out.push_back({p.id, ViolationKind::unpaired, "unpaired: no pair_id in matched dataset"});
      continue;
    }
    auto& slot = pairs[p.pair_id];
    (p.is_treated() ? slot.treated : slot.control).push_back(&p);
  }
  for (const auto& p : dataset.participants) {
    if (p.pair_id.empty()) continue;
    const auto& slot = pairs[p.pair_id];
    if (slot.treated.size() == 1 && slot.control.size() == 1) continue;
    if (slot.treated.empty() || slot.control.empty()) {
      out.push_back({p.id, ViolationKind::unpaired,
                     "unpaired: pair_id '" + p.pair_id + "' has no matching " +
                         (p.is_treated() ? "control" : "treated")});
    } else {
      out.push_back({p.id, ViolationKind::pair_mismatch,
                     "pair_id '" + p.pair_id + "' is not a 1:1 pair"});
    }
  }
  return out;
}

void require_valid(const CohortDataset& dataset) {
  const auto violations = validate(dataset);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << violations.size() << " dataset violation(s)";
  const std::size_t shown = std::min<std::size_t>(violations.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) {
    msg << "; " << violations[i].participant_id << ": " << violations[i].message;
  }
  throw DataError(msg.str());
}

WindowResult restrict_window(const CohortDataset& dataset, const AnalysisWindow& window) {
  if (!(window.prior_days > 0.0) || !(window.post_days > 0.0)) {
    throw DataError("analysis window must have positive prior and post days");
  }
  WindowResult result;
  result.dataset.matched = dataset.matched;

  std::vector<Participant> clipped;
  clipped.reserve(dataset.participants.size());
  std::unordered_set<std::string> bad_pairs;
  std::unordered_set<std::string> bad_ids;

  for (const auto& p : dataset.participants) {
    Participant q = p;
    q.prior_start = std::max(p.prior_start, p.index_time - window.prior_days);
    q.end_time = std::min(p.end_time, p.index_time + window.post_days);
    std::erase_if(q.event_times,
                  [&](double t) { return !(q.prior_start < t && t <= q.end_time); });
    if (!(q.prior_start < q.index_time)) {
      bad_ids.insert(q.id);
      if (dataset.matched && !q.pair_id.empty()) bad_pairs.insert(q.pair_id);
    }
    clipped.push_back(std::move(q));
  }

  for (auto& q : clipped) {
    const bool drop = bad_ids.contains(q.id) ||
                      (dataset.matched && !q.pair_id.empty() && bad_pairs.contains(q.pair_id));
    if (drop) {
      result.excluded_ids.push_back(q.id);
    } else {
      result.dataset.participants.push_back(std::move(q));
    }
  }
  return result;
}

}  // namespace perr
