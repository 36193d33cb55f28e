#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "perr/errors.hpp"
#include "perr/survival.hpp"

namespace perr {

PartialLikelihood::PartialLikelihood(const SurvivalFrame& frame) : frame_(frame) {
  const std::size_t n = frame.size();
  by_stop_.resize(n);
  std::iota(by_stop_.begin(), by_stop_.end(), std::size_t{0});
  by_start_ = by_stop_;
  std::sort(by_stop_.begin(), by_stop_.end(), [&](std::size_t a, std::size_t b) {
    if (frame.stop(a) != frame.stop(b)) return frame.stop(a) > frame.stop(b);
    return a < b;
  });
  std::sort(by_start_.begin(), by_start_.end(), [&](std::size_t a, std::size_t b) {
    if (frame.start(a) != frame.start(b)) return frame.start(a) > frame.start(b);
    return a < b;
  });
  for (std::size_t i : by_stop_) {
    if (frame.event(i) && (event_times_.empty() || event_times_.back() != frame.stop(i))) {
      event_times_.push_back(frame.stop(i));
    }
  }
}

// Walks distinct event times from latest to earliest, adding rows once
// stop >= t and removing them once start >= t, so the running sums always
// cover the risk set {start < t <= stop}. Linear predictors are shifted by
// their maximum for overflow safety; the shift cancels in every ratio and is
// added back to the log-likelihood. `hazard` and `zbar` (when requested)
// receive the Breslow increments and weighted means in the same descending
// order, on the shifted scale.
template <bool Derivatives>
double PartialLikelihood::sweep(const Eigen::VectorXd& beta, Eigen::VectorXd* score,
                                Eigen::MatrixXd* info, std::vector<double>* hazard,
                                Eigen::MatrixXd* zbar) const {
  const std::size_t n = frame_.size();
  const std::size_t p = frame_.dimension();
  if (static_cast<std::size_t>(beta.size()) != p) {
    throw DataError("coefficient vector dimension does not match the design");
  }

  std::vector<double> eta(n), w(n);
  double shift = n ? -std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    const auto xi = frame_.x_row(i);
    for (std::size_t j = 0; j < p; ++j) e += xi[j] * beta[static_cast<Eigen::Index>(j)];
    eta[i] = e;
    shift = std::max(shift, e);
  }
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(eta[i] - shift);

  double s0 = 0.0;
  std::vector<double> s1(p, 0.0), s2(Derivatives ? p * p : 0, 0.0);
  std::vector<double> ev_x(p, 0.0), zb(p, 0.0);
  if constexpr (Derivatives) {
    score->setZero(static_cast<Eigen::Index>(p));
    info->setZero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  }
  if (zbar) zbar->resize(static_cast<Eigen::Index>(event_times_.size()), static_cast<Eigen::Index>(p));
  if (hazard) hazard->assign(event_times_.size(), 0.0);

  auto accumulate = [&](std::size_t r, double sign) {
    const double wr = sign * w[r];
    const auto xr = frame_.x_row(r);
    s0 += wr;
    for (std::size_t j = 0; j < p; ++j) {
      const double a = wr * xr[j];
      s1[j] += a;
      if constexpr (Derivatives) {
        for (std::size_t k = j; k < p; ++k) s2[j * p + k] += a * xr[k];
      }
    }
  };

  double loglik = 0.0;
  std::size_t i_stop = 0, i_start = 0;
  for (std::size_t e = 0; e < event_times_.size(); ++e) {
    const double t = event_times_[e];
    double d = 0.0, ev_eta = 0.0;
    std::fill(ev_x.begin(), ev_x.end(), 0.0);
    for (; i_stop < n && frame_.stop(by_stop_[i_stop]) >= t; ++i_stop) {
      const std::size_t r = by_stop_[i_stop];
      accumulate(r, 1.0);
      if (frame_.event(r) && frame_.stop(r) == t) {
        d += 1.0;
        ev_eta += eta[r];
        const auto xr = frame_.x_row(r);
        for (std::size_t j = 0; j < p; ++j) ev_x[j] += xr[j];
      }
    }
    for (; i_start < n && frame_.start(by_start_[i_start]) >= t; ++i_start) {
      accumulate(by_start_[i_start], -1.0);
    }

    loglik += ev_eta - d * (std::log(s0) + shift);
    for (std::size_t j = 0; j < p; ++j) zb[j] = s1[j] / s0;
    if constexpr (Derivatives) {
      for (std::size_t j = 0; j < p; ++j) {
        (*score)[static_cast<Eigen::Index>(j)] += ev_x[j] - d * zb[j];
        for (std::size_t k = j; k < p; ++k) {
          (*info)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) +=
              d * (s2[j * p + k] / s0 - zb[j] * zb[k]);
        }
      }
    }
    if (hazard) (*hazard)[e] = d / s0;
    if (zbar) {
      for (std::size_t j = 0; j < p; ++j) {
        (*zbar)(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(j)) = zb[j];
      }
    }
  }
  if constexpr (Derivatives) {
    *info = info->selfadjointView<Eigen::Upper>();
  }
  return loglik;
}

double PartialLikelihood::log_likelihood(const Eigen::VectorXd& beta) const {
  return sweep<false>(beta, nullptr, nullptr, nullptr, nullptr);
}

LikelihoodPoint PartialLikelihood::evaluate(const Eigen::VectorXd& beta) const {
  LikelihoodPoint pt;
  pt.log_likelihood = sweep<true>(beta, &pt.score, &pt.information, nullptr, nullptr);
  return pt;
}

Eigen::MatrixXd PartialLikelihood::score_residuals(const Eigen::VectorXd& beta) const {
  const std::size_t n = frame_.size();
  const std::size_t p = frame_.dimension();
  std::vector<double> hazard;
  Eigen::MatrixXd zbar;
  sweep<false>(beta, nullptr, nullptr, &hazard, &zbar);

  // Ascending cumulative sums of dLambda and zbar * dLambda.
  const std::size_t m = event_times_.size();
  std::vector<double> times(m), cum0(m + 1, 0.0);
  Eigen::MatrixXd cum1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t src = m - 1 - k;
    times[k] = event_times_[src];
    cum0[k + 1] = cum0[k] + hazard[src];
    cum1.row(static_cast<Eigen::Index>(k + 1)) =
        cum1.row(static_cast<Eigen::Index>(k)) + hazard[src] * zbar.row(static_cast<Eigen::Index>(src));
  }

  double shift = -std::numeric_limits<double>::infinity();
  std::vector<double> eta(n);
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    const auto xi = frame_.x_row(i);
    for (std::size_t j = 0; j < p; ++j) e += xi[j] * beta[static_cast<Eigen::Index>(j)];
    eta[i] = e;
    shift = std::max(shift, e);
  }

  Eigen::MatrixXd resid(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = frame_.x_row(i);
    const double wi = std::exp(eta[i] - shift);
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(times.begin(), times.end(), frame_.stop(i)) - times.begin());
    const auto lo = static_cast<std::size_t>(
        std::upper_bound(times.begin(), times.end(), frame_.start(i)) - times.begin());
    const double dc0 = cum0[hi] - cum0[lo];
    for (std::size_t j = 0; j < p; ++j) {
      const auto J = static_cast<Eigen::Index>(j);
      const double dc1 = cum1(static_cast<Eigen::Index>(hi), J) - cum1(static_cast<Eigen::Index>(lo), J);
      double r = -wi * (xi[j] * dc0 - dc1);
      if (frame_.event(i)) {
        // stop(i) is times[hi - 1]; zbar rows are stored in descending order.
        r += xi[j] - zbar(static_cast<Eigen::Index>(m - hi), J);
      }
      resid(static_cast<Eigen::Index>(i), J) = r;
    }
  }
  return resid;
}

double log_partial_likelihood(const SurvivalFrame& frame, const Eigen::VectorXd& beta) {
  return PartialLikelihood(frame).log_likelihood(beta);
}

}  // namespace perr
