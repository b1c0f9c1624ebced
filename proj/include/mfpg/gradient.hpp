#pragma once

#include "mfpg/cloud.hpp"
#include "mfpg/features.hpp"
#include "mfpg/mdp.hpp"
#include "mfpg/soft_dp.hpp"

namespace mfpg {

/// Measure-dependent quantities shared by every particle in one step.
struct MeanFieldState {
  TabularPolicy policy;
  Matrix log_density;   // ln(pi/mu)
  ValueFunctions values;
  StateDistribution occupancy;  // d^pi_rho
  // c(s,a) = d(s)/(1-gamma) pi(a|s) (Qbar(s,a) - sum_a' pi(a'|s) Qbar(s,a')),
  // Qbar = Q - tau ln(pi/mu). First variation is sum c f, its gradient sum c grad f.
  Matrix coeff;
  double objective = 0.0;  // J^{tau,0} = V(rho)
  double tau = 0.0;
};

MeanFieldState evaluate_state(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud,
                              double tau, const StateDistribution& rho);

/// delta J^{tau,0} / delta nu at theta (up to the usual additive constant).
double first_variation(const MeanFieldState& state, const FeatureMap& features, std::span<const double> theta);

/// grad_theta of the first variation.
void first_variation_gradient(const MeanFieldState& state, const FeatureMap& features, std::span<const double> theta,
                              std::span<double> out);

/// m x d matrix of grad_theta deltaJ/delta nu(nu, theta_i).
RowMatrix flow_gradient(const MeanFieldState& state, const FeatureMap& features, const ParticleCloud& cloud);
RowMatrix flow_gradient(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud, double tau,
                        const StateDistribution& rho);

/// sum_i w_i |G_i|^2
double weighted_square_norm(const RowMatrix& g, const Vector& weights);

}  // namespace mfpg
