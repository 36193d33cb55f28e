#pragma once

// Brute-force references that share no code with the library fitters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "perr/counting_process.hpp"
#include "perr/rng.hpp"

namespace perr::oracle {

struct Obs {
  double start, stop;
  bool event;
  std::vector<double> x;
  int cluster;
};

inline std::vector<Obs> observations(const SurvivalFrame& f) {
  std::vector<Obs> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto row = f.x_row(i);
    out.push_back({f.start(i), f.stop(i), f.event(i), {row.begin(), row.end()}, f.cluster(i)});
  }
  return out;
}

inline double eta(const Obs& o, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < o.x.size(); ++j) s += o.x[j] * b[static_cast<Eigen::Index>(j)];
  return s;
}

/// Breslow log partial likelihood by direct double loop over rows.
inline double log_likelihood(const std::vector<Obs>& rows, const Eigen::VectorXd& b) {
  double ll = 0.0;
  for (const auto& e : rows) {
    if (!e.event) continue;
    double denom = 0.0;
    for (const auto& r : rows) {
      if (r.start < e.stop && e.stop <= r.stop) denom += std::exp(eta(r, b));
    }
    ll += eta(e, b) - std::log(denom);
  }
  return ll;
}

/// Clustered sandwich from score residuals computed by definition.
inline Eigen::MatrixXd sandwich(const std::vector<Obs>& rows, const Eigen::VectorXd& b,
                                const Eigen::MatrixXd& information, int clusters) {
  const auto p = static_cast<Eigen::Index>(b.size());
  std::vector<double> times;
  for (const auto& e : rows) {
    if (e.event) times.push_back(e.stop);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<double> dlambda(times.size());
  std::vector<Eigen::VectorXd> zbar(times.size(), Eigen::VectorXd::Zero(p));
  for (std::size_t k = 0; k < times.size(); ++k) {
    double s0 = 0.0, d = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    for (const auto& r : rows) {
      if (r.start < times[k] && times[k] <= r.stop) {
        const double w = std::exp(eta(r, b));
        s0 += w;
        for (Eigen::Index j = 0; j < p; ++j) s1[j] += w * r.x[static_cast<std::size_t>(j)];
      }
      if (r.event && r.stop == times[k]) d += 1.0;
    }
    dlambda[k] = d / s0;
    zbar[k] = s1 / s0;
  }
  Eigen::MatrixXd per_cluster = Eigen::MatrixXd::Zero(clusters, p);
  for (const auto& r : rows) {
    Eigen::VectorXd z(p);
    for (Eigen::Index j = 0; j < p; ++j) z[j] = r.x[static_cast<std::size_t>(j)];
    Eigen::VectorXd res = Eigen::VectorXd::Zero(p);
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (r.start < times[k] && times[k] <= r.stop) {
        res -= std::exp(eta(r, b)) * (z - zbar[k]) * dlambda[k];
        if (r.event && r.stop == times[k]) res += z - zbar[k];
      }
    }
    per_cluster.row(r.cluster) += res.transpose();
  }
  const Eigen::MatrixXd a_inv = information.inverse();
  return a_inv * (per_cluster.transpose() * per_cluster) * a_inv;
}

/// One-covariate first-event cohort of n subjects with distinct times. The
/// first two subjects take x = 0 and x = 1 so the coefficient is identified.
inline SurvivalFrame tiny_cohort(std::uint64_t seed, int n) {
  Rng rng(seed);
  SurvivalFrame f({"x"});
  for (int i = 0; i < n; ++i) {
    const int c = f.add_cluster("s" + std::to_string(i));
    const bool draw = rng.bernoulli(0.5);
    const double x[] = {i < 2 ? static_cast<double>(i) : (draw ? 1.0 : 0.0)};
    const double t = rng.uniform(0.5, 10.0) * (x[0] == 1.0 ? 0.7 : 1.0);
    const bool event = rng.bernoulli(0.7);
    f.add_row(c, 0.0, t, event, x);
  }
  return f;
}

/// Argmax over [-5, 5] in steps of 1e-4; `interior` is false when the
/// maximum sits at the edge (the likelihood is monotone there) and `flat`
/// is true when the likelihood does not depend on beta at all.
struct GridMax {
  double beta;
  bool interior;
  bool flat;
};

inline GridMax grid_argmax(const std::vector<Obs>& rows) {
  Eigen::VectorXd b(1);
  double best = -1e300, worst = 1e300, arg = 0.0;
  const int steps = 100000;
  for (int k = 0; k <= steps; ++k) {
    b[0] = -5.0 + 1e-4 * k;
    const double v = log_likelihood(rows, b);
    worst = std::min(worst, v);
    if (v > best) {
      best = v;
      arg = b[0];
    }
  }
  const bool flat = best - worst <= 1e-12 * std::max(1.0, std::abs(best));
  return {arg, !flat && arg > -5.0 + 1e-3 && arg < 5.0 - 1e-3, flat};
}

}  // namespace perr::oracle
