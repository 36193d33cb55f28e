#pragma once

#include <stdexcept>
#include <string>

namespace perr {

// Malformed or inconsistent input data (bad spans, unpaired participants, parse failures).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimation failed: no events, divergence, singular systems that could not be rescued.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A coefficient ran off to +/- infinity; `covariate` names the offending column.
class MonotoneLikelihoodError : public NumericalError {
 public:
  MonotoneLikelihoodError(std::string covariate, double value)
      : NumericalError("monotone likelihood: coefficient for '" + covariate +
                       "' diverged (|beta| = " + std::to_string(value) + ")"),
        covariate_(std::move(covariate)) {}

  const std::string& covariate() const noexcept { return covariate_; }

 private:
  std::string covariate_;
};

}  // namespace perr
