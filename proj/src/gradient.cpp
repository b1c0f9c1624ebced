#include "mfpg/gradient.hpp"

#include "mfpg/parallel.hpp"
#include "mfpg/policy.hpp"

namespace mfpg {

MeanFieldState evaluate_state(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud,
                              double tau, const StateDistribution& rho) {
  if (!(tau >= 0.0)) throw ValidationError("tau must be nonnegative");
  require_compatible(features, mdp, cloud);
  MeanFieldState st;
  st.tau = tau;
  st.policy = policy_from_cloud(cloud, features, mdp);
  if (!st.policy.strictly_positive()) {
    throw NumericalError("mean-field policy underflowed to a zero probability");
  }
  st.log_density = log_density(st.policy, mdp);
  st.values = policy_evaluate(mdp, st.policy, tau);
  st.occupancy = occupancy(mdp, st.policy, rho);
  st.objective = rho.dot(st.values.v);

  const Matrix qbar = st.values.q - tau * st.log_density;
  st.coeff.resize(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    const double avg = st.policy.probs.row(s).dot(qbar.row(s));
    const double mass = st.occupancy(s) / (1.0 - mdp.gamma);
    for (int a = 0; a < mdp.n_actions; ++a) st.coeff(s, a) = mass * st.policy(s, a) * (qbar(s, a) - avg);
  }
  return st;
}

double first_variation(const MeanFieldState& state, const FeatureMap& features, std::span<const double> theta) {
  Matrix f;
  features.values(theta, f);
  return state.coeff.cwiseProduct(f).sum();
}

void first_variation_gradient(const MeanFieldState& state, const FeatureMap& features, std::span<const double> theta,
                              std::span<double> out) {
  features.contract_gradient(theta, state.coeff, out);
}

RowMatrix flow_gradient(const MeanFieldState& state, const FeatureMap& features, const ParticleCloud& cloud) {
  RowMatrix g(cloud.size(), cloud.dim());
  parallel_for(cloud.size(), [&](std::size_t i) {
    std::span<double> row(g.data() + i * g.cols(), static_cast<std::size_t>(g.cols()));
    features.contract_gradient(cloud.particle(static_cast<int>(i)), state.coeff, row);
  });
  return g;
}

RowMatrix flow_gradient(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud, double tau,
                        const StateDistribution& rho) {
  return flow_gradient(evaluate_state(mdp, features, cloud, tau, rho), features, cloud);
}

double weighted_square_norm(const RowMatrix& g, const Vector& weights) {
  double acc = 0.0;
  for (long i = 0; i < g.rows(); ++i) acc += weights(i) * g.row(i).squaredNorm();
  return acc;
}

}  // namespace mfpg
