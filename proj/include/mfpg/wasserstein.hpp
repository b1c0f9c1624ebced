#pragma once

#include "mfpg/cloud.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mfpg {

enum class WassersteinMethod { automatic, exact_1d, assignment, sliced };

struct WassersteinOptions {
  WassersteinMethod method = WassersteinMethod::automatic;
  int projections = 64;
  std::uint64_t seed = 0;
};

struct WassersteinResult {
  double value = 0.0;
  WassersteinMethod method = WassersteinMethod::automatic;
  bool lower_bound = false;  // sliced surrogate
};

WassersteinResult wasserstein_report(const ParticleCloud& a, const ParticleCloud& b, int p,
                                     const WassersteinOptions& options = {});

double wasserstein(const ParticleCloud& a, const ParticleCloud& b, int p, const WassersteinOptions& options = {});

double wasserstein(const ParticleCloud& a, const ParticleCloud& b, int p, WassersteinMethod method);

/// Exact W_p between two weighted 1-D empirical measures.
double wasserstein_1d(std::vector<double> xs, Vector wx, std::vector<double> ys, Vector wy, int p);

/// Minimum-cost perfect matching on a square cost matrix. Returns the column
/// assigned to each row.
std::vector<int> hungarian(const Matrix& cost);

/// Closed-form W2 between N(m1, s1) and N(m2, s2).
double gaussian_w2(const Vector& m1, const Matrix& s1, const Vector& m2, const Matrix& s2);

std::string to_string(WassersteinMethod method);
WassersteinMethod parse_wasserstein_method(const std::string& name);

}  // namespace mfpg
