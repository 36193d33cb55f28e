#pragma once

#include <cstdint>
#include <random>

namespace perr {

/// SplitMix64 finaliser; a good bijective mixer for deriving stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for an independent stream identified by (base, stream, counter).
/// Pure function of its arguments, so replicate k always sees the same
/// numbers no matter which worker runs it.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t counter = 0) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double uniform(double a, double b);
  bool bernoulli(double p);
  double normal(double mean, double sd);
  double gamma(double shape, double scale);
  std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace perr
