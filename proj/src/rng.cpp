#include "mfpg/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>

namespace mfpg {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t i, std::uint64_t j, std::uint64_t k) const {
  std::uint64_t h = mix64(seed_ ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ stream_);
  h = mix64(h ^ i);
  h = mix64(h ^ j);
  return mix64(h ^ k);
}

double CounterRng::uniform(std::uint64_t i, std::uint64_t j, std::uint64_t k) const {
  return (static_cast<double>(bits(i, j, k) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t i, std::uint64_t j, std::uint64_t k) const {
  return normal_quantile(uniform(i, j, k));
}

double normal_quantile(double u) {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

}  // namespace mfpg
