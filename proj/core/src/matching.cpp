#include <algorithm>
#include <map>
#include <optional>
#include <numeric>
#include <string>
#include <utility>

#include "perr/cohort.hpp"
#include "perr/errors.hpp"
#include "perr/rng.hpp"

namespace perr {

std::string to_string(MatchRule r) { return r == MatchRule::random ? "random" : "closest_end"; }

MatchRule parse_match_rule(const std::string& text) {
  if (text == "random") return MatchRule::random;
  if (text == "closest_end" || text == "closest") return MatchRule::closest_end;
  throw DataError("unknown match rule '" + text + "' (expected random or closest_end)");
}

namespace {

std::string key_of(const Participant& p, std::span<const std::string> keys) {
  std::string k;
  for (const auto& name : keys) {
    auto it = p.covariates.find(name);
    if (it == p.covariates.end()) {
      throw DataError("participant '" + p.id + "' lacks matching covariate '" + name + "'");
    }
    if (!k.empty()) k += '|';
    k += name + '=' + it->second;
  }
  return k;
}

// Controls of one key stratum sorted by end_time, with a Fenwick tree over
// availability so the k-th unused control at or after a position is found in O(log n).
class Stratum {
 public:
  void add(double end, std::size_t pool_index) { entries_.emplace_back(end, pool_index); }

  void finalize() {
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    tree_.assign(entries_.size() + 1, 0);
    for (std::size_t i = 0; i < entries_.size(); ++i) update(i, +1);
  }

  // First position whose end_time is strictly greater than t.
  std::size_t first_after(double t) const {
    return static_cast<std::size_t>(
        std::upper_bound(entries_.begin(), entries_.end(), t,
                         [](double v, const auto& e) { return v < e.first; }) -
        entries_.begin());
  }

  int available_from(std::size_t pos) const { return prefix(entries_.size()) - prefix(pos); }

  // Position of the k-th (0-based) available entry at or after `pos`.
  std::size_t kth_from(std::size_t pos, int k) const {
    int target = prefix(pos) + k + 1;
    std::size_t idx = 0;
    std::size_t step = 1;
    while (step * 2 <= entries_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (idx + step <= entries_.size() && tree_[idx + step] < target) {
        idx += step;
        target -= tree_[idx];
      }
    }
    return idx;  // 0-based position
  }

  void take(std::size_t pos) { update(pos, -1); }
  void give_back(std::size_t pos) { update(pos, +1); }
  std::size_t pool_index(std::size_t pos) const { return entries_[pos].second; }

 private:
  void update(std::size_t pos, int delta) {
    for (std::size_t i = pos + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }
  int prefix(std::size_t count) const {
    int s = 0;
    for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  std::vector<std::pair<double, std::size_t>> entries_;
  std::vector<int> tree_;
};

}  // namespace

MatchResult match_controls(std::span<const Participant> treated,
                           std::span<const Participant> pool,
                           std::span<const std::string> keys, const MatchOptions& options) {
  MatchResult result;
  auto& report = result.report;
  report.treated_in = treated.size();
  report.pool_in = pool.size();

  std::map<std::string, Stratum> strata;
  for (std::size_t j = 0; j < pool.size(); ++j) strata[key_of(pool[j], keys)].add(pool[j].end_time, j);
  for (auto& [k, s] : strata) s.finalize();

  std::vector<std::size_t> order(treated.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return treated[a].index_time < treated[b].index_time;
  });

  Rng rng(options.seed);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (treated idx, pool idx)
  for (std::size_t i : order) {
    const auto& t = treated[i];
    auto found = strata.find(key_of(t, keys));
    if (found == strata.end()) {
      ++report.unmatched_treated;
      continue;
    }
    Stratum& stratum = found->second;
    const std::size_t lo = stratum.first_after(t.index_time);

    // Candidates still under follow-up at the index time; those whose
    // observation starts after it are set aside and restored afterwards.
    std::vector<std::size_t> set_aside;
    std::optional<std::size_t> chosen;
    while (stratum.available_from(lo) > 0) {
      const int k = options.rule == MatchRule::random
                        ? static_cast<int>(rng.below(static_cast<std::uint64_t>(stratum.available_from(lo))))
                        : 0;
      const std::size_t pos = stratum.kth_from(lo, k);
      stratum.take(pos);
      if (pool[stratum.pool_index(pos)].prior_start > t.index_time) {
        set_aside.push_back(pos);
        continue;
      }
      chosen = pos;
      break;
    }
    for (std::size_t pos : set_aside) stratum.give_back(pos);
    if (!chosen) {
      ++report.unmatched_treated;
      continue;
    }
    pairs.emplace_back(i, stratum.pool_index(*chosen));
    ++report.key_distribution[found->first];
  }

  // Emit in the treated persons' input order for stable output files.
  std::sort(pairs.begin(), pairs.end());
  result.dataset.matched = true;
  result.dataset.participants.reserve(pairs.size() * 2);
  for (const auto& [ti, pj] : pairs) {
    Participant tp = treated[ti];
    Participant cp = pool[pj];
    tp.group = Group::treated;
    cp.group = Group::control;
    tp.pair_id = tp.id;
    cp.pair_id = tp.id;
    cp.index_time = tp.index_time;
    result.dataset.participants.push_back(std::move(tp));
    result.dataset.participants.push_back(std::move(cp));
  }
  report.pairs = pairs.size();
  report.unused_controls = pool.size() - pairs.size();
  return result;
}

}  // namespace perr
