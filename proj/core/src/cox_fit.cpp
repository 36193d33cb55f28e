#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "perr/errors.hpp"
#include "perr/survival.hpp"

namespace perr {
namespace {

// Inverse of a symmetric information matrix; falls back to a ridge when it is
// not numerically positive definite.
Eigen::MatrixXd invert_information(const Eigen::MatrixXd& info, double ridge, bool& ridged) {
  const auto p = info.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() == Eigen::Success) {
    const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
    if (p == 0 || d.minCoeff() > 1e-12 * std::max(1.0, d.maxCoeff())) {
      return llt.solve(Eigen::MatrixXd::Identity(p, p));
    }
  }
  ridged = true;
  Eigen::MatrixXd reg = info;
  reg.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("information matrix is singular even after ridge regularisation");
  }
  return ldlt.solve(Eigen::MatrixXd::Identity(p, p));
}

}  // namespace

double FitResult::model_se(std::size_t j) const {
  const auto J = static_cast<Eigen::Index>(j);
  return std::sqrt(std::max(0.0, model_covariance(J, J)));
}

double FitResult::robust_se(std::size_t j) const {
  const auto J = static_cast<Eigen::Index>(j);
  return std::sqrt(std::max(0.0, robust_covariance(J, J)));
}

FitResult fit(const SurvivalFrame& frame, const FitConfig& config) {
  if (config.max_iterations < 1 || !(config.convergence_tol > 0.0)) {
    throw DataError("FitConfig requires max_iterations >= 1 and convergence_tol > 0");
  }
  FitResult result;
  result.names = frame.covariate_names();
  result.events = frame.event_count();
  if (result.events == 0) throw NumericalError("no events: partial likelihood is undefined");

  const PartialLikelihood pl(frame);
  const auto p = static_cast<Eigen::Index>(frame.dimension());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  LikelihoodPoint pt = pl.evaluate(beta);

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    result.iterations = iter;
    bool ridged = false;
    Eigen::VectorXd step = invert_information(pt.information, config.ridge_fallback, ridged) * pt.score;

    Eigen::VectorXd candidate = beta + step;
    double ll = pl.log_likelihood(candidate);
    // Step halving whenever the full step lowers the likelihood.
    for (int h = 0; h < 40 && !(ll >= pt.log_likelihood - 1e-12 * std::abs(pt.log_likelihood)); ++h) {
      step *= 0.5;
      candidate = beta + step;
      ll = pl.log_likelihood(candidate);
    }
    const double previous = pt.log_likelihood;
    beta = candidate;
    pt = pl.evaluate(beta);

    Eigen::Index worst = 0;
    if (p > 0 && beta.cwiseAbs().maxCoeff(&worst) > config.divergence_bound) {
      throw MonotoneLikelihoodError(result.names[static_cast<std::size_t>(worst)],
                                    std::abs(beta[worst]));
    }
    const double rel = std::abs(pt.log_likelihood - previous) / std::max(1.0, std::abs(pt.log_likelihood));
    const double max_step = p > 0 ? step.cwiseAbs().maxCoeff() : 0.0;
    if (rel <= config.convergence_tol && max_step < 1e-5) {
      result.converged = true;
      break;
    }
  }

  result.coefficients = beta;
  result.score = pt.score;
  result.log_partial_likelihood = pt.log_likelihood;
  result.model_covariance = invert_information(pt.information, config.ridge_fallback, result.ridge_applied);
  if (config.robust) result.robust_covariance = robust_clustered_variance(frame, result, config);
  return result;
}

Eigen::MatrixXd robust_clustered_variance(const SurvivalFrame& frame, FitResult& fit,
                                          const FitConfig& config) {
  const PartialLikelihood pl(frame);
  const auto p = static_cast<Eigen::Index>(frame.dimension());
  const Eigen::MatrixXd resid = pl.score_residuals(fit.coefficients);

  Eigen::MatrixXd by_cluster = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(frame.cluster_count()), p);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    by_cluster.row(frame.cluster(i)) += resid.row(static_cast<Eigen::Index>(i));
  }
  const Eigen::MatrixXd meat = by_cluster.transpose() * by_cluster;

  Eigen::MatrixXd bread = fit.model_covariance;
  if (bread.rows() != p) {
    const LikelihoodPoint pt = pl.evaluate(fit.coefficients);
    bread = invert_information(pt.information, config.ridge_fallback, fit.ridge_applied);
  }
  Eigen::MatrixXd v = bread * meat * bread;
  return 0.5 * (v + v.transpose());
}

double normal_quantile_two_sided(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DataError("confidence level must lie in (0, 1)");
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + level / 2.0);
}

Interval wald_ci(double log_estimate, double se, double level) {
  const double z = normal_quantile_two_sided(level);
  return {std::exp(log_estimate - z * se), std::exp(log_estimate + z * se)};
}

Interval wald_ci(const FitResult& fit, std::size_t index, double level) {
  return wald_ci(fit.coefficients[static_cast<Eigen::Index>(index)], fit.robust_se(index), level);
}

}  // namespace perr
