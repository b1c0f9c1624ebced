#pragma once

#include "mfpg/analysis.hpp"
#include "mfpg/cloud.hpp"
#include "mfpg/features.hpp"
#include "mfpg/mdp.hpp"
#include "mfpg/prior.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfpg {

/// Entropy-regularized Gaussian bandit: reward r(a) = ell.a - lambda |a|^2 on R^d,
/// Lebesgue reference measure, Gaussian prior N(m_u, sigma_u^2 I).
struct BanditSpec {
  Vector ell;
  double lambda = 1.0;
  double tau = 1.0;
  Vector m_u;
  double sigma_u = 1.0;
  double sigma = 0.0;

  int dim() const { return static_cast<int>(ell.size()); }
};

void require_valid(const BanditSpec& spec);

struct GaussianMoments {
  Vector mean;
  Matrix covariance;
};

/// N(ell/(2 lambda), tau/(2 lambda) I).
GaussianMoments analytic_optimal_policy(const BanditSpec& spec);

struct StationaryMean {
  Vector mean;
  bool unique = true;
  std::string note;
};

/// (m_u sigma^2 + 2 sigma_u^2 ell)/(sigma^2 + 4 lambda sigma_u^2); for sigma = 0
/// the first-order condition only fixes the mean at ell/(2 lambda).
StationaryMean analytic_stationary_mean(const BanditSpec& spec);

/// Decay rate c = 2 lambda + sigma^2/(2 sigma_u^2) of the mean ODE.
double mean_decay_rate(const BanditSpec& spec);

/// m_inf = (ell + sigma^2 m_u/(2 sigma_u^2))/c.
Vector mean_equilibrium(const BanditSpec& spec);

/// m(t) = m_inf + (m0 - m_inf) e^{-ct}.
Vector analytic_mean_trajectory(const BanditSpec& spec, const Vector& m0, double t);

/// Stationary parameter law N(m*, sigma_u^2 I) (sigma > 0); for sigma = 0 the
/// point mass at ell/(2 lambda).
GaussianMoments analytic_stationary_measure(const BanditSpec& spec);

/// Rate for the bandit W2 decay: sigma^2 kappa / 2 with kappa = 1/sigma_u^2.
double bandit_rate(const BanditSpec& spec);

/// delta J^{tau,0}/delta nu (theta_i) = theta_i . (ell - 2 lambda theta_bar).
Vector bandit_first_variation(const BanditSpec& spec, const ParticleCloud& cloud);

/// Closed-form J^{tau,sigma} of the cloud with the Gaussian-proxy KL.
double bandit_objective(const BanditSpec& spec, const ParticleCloud& cloud);

GaussianPrior bandit_prior(const BanditSpec& spec);

struct BanditRecord {
  long step = 0;
  double time = 0.0;
  Vector mean;
  Vector analytic_mean;
  double w2_to_star = 0.0;
  double objective = 0.0;
};

struct BanditTrajectory {
  std::vector<BanditRecord> records;
  Vector initial_mean;
  ParticleCloud final_cloud;
};

struct BanditSimOptions {
  long record_every = 1;
  std::optional<ParticleCloud> init;  // default: sample from the prior
};

/// Euler-Maruyama for d theta_i = (ell - 2 lambda theta_bar - sigma^2/(2 sigma_u^2)(theta_i - m_u)) dt + sigma dW_i.
BanditTrajectory simulate_bandit_flow(const BanditSpec& spec, int m, double eta, long steps, std::uint64_t seed,
                                      const BanditSimOptions& options = {});

/// Cloud of m points at the stratified normal quantiles of N(mean, cov) (d = 1)
/// or seeded draws (d > 1).
ParticleCloud stationary_sample(const BanditSpec& spec, int m, std::uint64_t seed, bool stratified);

// ---------------------------------------------------------------------------
// Finite-MDP bridge

struct CrosscheckModel {
  FiniteMdp mdp;
  ClippedQuadraticFeature feature;
  double centre;
  double policy_std;
  double cell_width;
};

/// One-state MDP on a grid of `grid` cells over centre +- 5 policy std, with
/// mu = cell widths and r = ell a - lambda a^2. Requires d = 1.
CrosscheckModel crosscheck_model(const BanditSpec& spec, int grid);

struct CrosscheckOptions {
  int m = 4000;
  double eta = 1e-2;
  long steps = 1000;
  std::uint64_t seed = 0;
  double average_from = 0.5;  // fraction of the run after which policy means are averaged
};

struct CrosscheckReport {
  int grid = 0;
  double policy_mean = 0.0;
  double analytic_mean = 0.0;
  double error = 0.0;
  double cell_width = 0.0;
  long samples = 0;
};

CrosscheckReport discretized_crosscheck(const BanditSpec& spec, int grid, const CrosscheckOptions& options);

}  // namespace mfpg
