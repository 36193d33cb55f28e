#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perr/counting_process.hpp"

namespace perr {

struct FitConfig {
  int max_iterations = 50;
  double convergence_tol = 1e-9;  // relative change in log partial likelihood
  double ridge_fallback = 1e-8;   // diagonal inflation, used only when the information is singular
  double divergence_bound = 20.0; // |beta| beyond this is reported as monotone likelihood
  bool robust = true;             // compute the clustered sandwich after convergence
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd model_covariance;   // inverse information
  Eigen::MatrixXd robust_covariance;  // clustered sandwich
  Eigen::VectorXd score;              // at the solution
  double log_partial_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool ridge_applied = false;
  std::size_t events = 0;

  double model_se(std::size_t j) const;
  double robust_se(std::size_t j) const;
};

/// Log partial likelihood, score and observed information at one beta.
struct LikelihoodPoint {
  double log_likelihood = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;  // negative Hessian
};

/// Breslow partial likelihood over (start, stop] risk sets. Construction
/// sorts the rows once; evaluate() is then O(n p^2) per call.
class PartialLikelihood {
 public:
  // Keeps a reference to `frame`, which must outlive this object.
  explicit PartialLikelihood(const SurvivalFrame& frame);
  explicit PartialLikelihood(SurvivalFrame&&) = delete;

  double log_likelihood(const Eigen::VectorXd& beta) const;
  LikelihoodPoint evaluate(const Eigen::VectorXd& beta) const;

  /// Per-row score residuals (counting-process decomposition) at beta.
  /// Row i: dN_i(z_i - zbar(t_i)) - integral over (start_i, stop_i] of
  /// exp(eta_i)(z_i - zbar(t)) dLambda0(t).
  Eigen::MatrixXd score_residuals(const Eigen::VectorXd& beta) const;

  const SurvivalFrame& frame() const noexcept { return frame_; }

 private:
  template <bool Derivatives>
  double sweep(const Eigen::VectorXd& beta, Eigen::VectorXd* score, Eigen::MatrixXd* info,
               std::vector<double>* hazard, Eigen::MatrixXd* zbar) const;

  const SurvivalFrame& frame_;
  std::vector<std::size_t> by_stop_;   // descending stop, events first within ties
  std::vector<std::size_t> by_start_;  // descending start
  std::vector<double> event_times_;    // distinct event times, descending
};

double log_partial_likelihood(const SurvivalFrame& frame, const Eigen::VectorXd& beta);

/// Newton-Raphson from beta = 0 with step halving. Throws NumericalError when
/// there are no events and MonotoneLikelihoodError when a coefficient diverges.
/// Robust covariance is filled from the frame's clusters.
FitResult fit(const SurvivalFrame& frame, const FitConfig& config = {});

/// Sandwich A^-1 B A^-1 with B summed over clusters of per-row score residuals.
/// Sets fit.ridge_applied when A had to be regularised.
Eigen::MatrixXd robust_clustered_variance(const SurvivalFrame& frame, FitResult& fit,
                                          const FitConfig& config = {});

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Two-sided normal quantile, e.g. 1.959964 for level 0.95.
double normal_quantile_two_sided(double level);

/// exp(b -/+ z se): a Wald interval on the log scale mapped to the ratio scale.
Interval wald_ci(double log_estimate, double se, double level = 0.95);
Interval wald_ci(const FitResult& fit, std::size_t index, double level = 0.95);

}  // namespace perr
