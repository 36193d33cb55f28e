#include "perr/rng.hpp"

namespace perr {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t counter) noexcept {
  return mix64(mix64(mix64(base) ^ stream) ^ (counter * 0xd1b54a32d192ed03ULL));
}

double Rng::uniform_open() {
  // 53 random bits, offset by half an ulp so 0 and 1 are never produced.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform_open(); }

bool Rng::bernoulli(double p) { return uniform_open() < p; }

double Rng::normal(double mean, double sd) {
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>(mean, sd)(engine_);
}

double Rng::gamma(double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(engine_);
}

std::uint64_t Rng::below(std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

}  // namespace perr
