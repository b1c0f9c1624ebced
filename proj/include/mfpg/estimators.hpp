#pragma once

#include "mfpg/cloud.hpp"
#include "mfpg/prior.hpp"

#include <string>

namespace mfpg {

enum class KlMethod { gaussian_proxy, knn };

struct KlEstimate {
  double value = 0.0;
  KlMethod method = KlMethod::gaussian_proxy;  // method actually used
  bool fell_back = false;                      // gaussian_proxy was singular
};

/// Estimate of KL(nu^m | e^{-U}). Both methods are estimators: the empirical
/// measure itself has infinite KL.
KlEstimate kl_estimate_report(const ParticleCloud& cloud, const GaussianPrior& prior, KlMethod method);
double kl_estimate(const ParticleCloud& cloud, const GaussianPrior& prior, KlMethod method);

/// KL between the cloud's moment-matched Gaussian and the prior. Throws
/// NumericalError if the covariance is singular or m <= d.
double gaussian_proxy_kl(const ParticleCloud& cloud, const GaussianPrior& prior);

/// Kozachenko-Leonenko differential entropy with k-th neighbour distances.
double knn_entropy(const ParticleCloud& cloud, int k = 3);

/// Distance from each particle to its k-th nearest other particle.
Vector knn_distances(const ParticleCloud& cloud, int k);

/// ln of the moment-matched Gaussian density at each particle.
Vector gaussian_log_density(const ParticleCloud& cloud);

/// k-NN plug-in log density at each particle.
Vector knn_log_density(const ParticleCloud& cloud, int k = 3);

/// ln volume of the unit ball in R^d.
double log_unit_ball_volume(int d);

std::string to_string(KlMethod method);
KlMethod parse_kl_method(const std::string& name);

}  // namespace mfpg
