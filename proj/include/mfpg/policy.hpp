#pragma once

#include "mfpg/cloud.hpp"
#include "mfpg/features.hpp"
#include "mfpg/mdp.hpp"

namespace mfpg {

/// F(s,a) = sum_i w_i f(theta_i, s, a).
Matrix mean_field_logits(const ParticleCloud& cloud, const FeatureMap& features);

/// Row-wise softmax of logits against mu: pi(a|s) = exp(F) mu / sum exp(F) mu.
TabularPolicy softmax_policy(const Matrix& logits, const FiniteMdp& mdp);

TabularPolicy policy_from_cloud(const ParticleCloud& cloud, const FeatureMap& features, const FiniteMdp& mdp);

/// (f(theta,s,a) - sum_a' f(theta,s,a') pi(a'|s)) pi(a|s) for each action.
Vector policy_functional_derivative(const ParticleCloud& cloud, const FeatureMap& features, const FiniteMdp& mdp,
                                    std::span<const double> theta, int s);

void require_compatible(const FeatureMap& features, const FiniteMdp& mdp, const ParticleCloud& cloud);

}  // namespace mfpg
