#pragma once

#include <cstdint>

namespace mfpg {

// Stream tags so that different consumers of one seed never collide.
enum class Stream : std::uint64_t {
  flow_noise = 1,
  prior_init = 2,
  feature_table = 3,
  projections = 4,
  probe = 5,
  reference = 6,
  fuzz = 7,
};

/// Stateless generator: every draw is a hash of (seed, stream, i, j, k).
/// Results do not depend on call order, so parallel loops stay reproducible.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, Stream stream = Stream::flow_noise)
      : seed_(seed), stream_(static_cast<std::uint64_t>(stream)) {}

  std::uint64_t bits(std::uint64_t i, std::uint64_t j = 0, std::uint64_t k = 0) const;

  // Uniform in (0,1), never 0 or 1.
  double uniform(std::uint64_t i, std::uint64_t j = 0, std::uint64_t k = 0) const;

  // Standard normal by inverse CDF of uniform().
  double normal(std::uint64_t i, std::uint64_t j = 0, std::uint64_t k = 0) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

std::uint64_t mix64(std::uint64_t x);

/// Standard normal quantile.
double normal_quantile(double u);

}  // namespace mfpg
