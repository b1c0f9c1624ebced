#include "mfpg/policy.hpp"

#include "mfpg/parallel.hpp"

#include <cmath>
#include <vector>

namespace mfpg {

void require_compatible(const FeatureMap& features, const FiniteMdp& mdp, const ParticleCloud& cloud) {
  if (features.n_states() != mdp.n_states || features.n_actions() != mdp.n_actions) {
    throw ValidationError("feature map dimensions do not match the MDP");
  }
  if (cloud.dim() != features.param_dim()) {
    throw ValidationError("particle dimension " + std::to_string(cloud.dim()) + " does not match feature param_dim " +
                          std::to_string(features.param_dim()));
  }
}

Matrix mean_field_logits(const ParticleCloud& cloud, const FeatureMap& features) {
  const int m = cloud.size();
  std::vector<Matrix> per(m);
  parallel_for(m, [&](std::size_t i) { features.values(cloud.particle(static_cast<int>(i)), per[i]); });
  // Fixed index order keeps the sum independent of thread count.
  Matrix out = Matrix::Zero(features.n_states(), features.n_actions());
  for (int i = 0; i < m; ++i) out += cloud.weights(i) * per[i];
  return out;
}

TabularPolicy softmax_policy(const Matrix& logits, const FiniteMdp& mdp) {
  Matrix probs(logits.rows(), logits.cols());
  for (long s = 0; s < logits.rows(); ++s) {
    const double top = logits.row(s).maxCoeff();
    double total = 0.0;
    for (long a = 0; a < logits.cols(); ++a) {
      probs(s, a) = std::exp(logits(s, a) - top) * mdp.mu(a);
      total += probs(s, a);
    }
    probs.row(s) /= total;
  }
  return {probs};
}

TabularPolicy policy_from_cloud(const ParticleCloud& cloud, const FeatureMap& features, const FiniteMdp& mdp) {
  require_compatible(features, mdp, cloud);
  return softmax_policy(mean_field_logits(cloud, features), mdp);
}

Vector policy_functional_derivative(const ParticleCloud& cloud, const FeatureMap& features, const FiniteMdp& mdp,
                                    std::span<const double> theta, int s) {
  if (s < 0 || s >= mdp.n_states) throw ValidationError("policy_functional_derivative: state out of range");
  if (static_cast<int>(theta.size()) != features.param_dim()) {
    throw ValidationError("policy_functional_derivative: theta has wrong dimension");
  }
  const TabularPolicy pi = policy_from_cloud(cloud, features, mdp);
  Vector f(mdp.n_actions);
  for (int a = 0; a < mdp.n_actions; ++a) f(a) = features.value(theta, s, a);
  const double avg = f.dot(pi.probs.row(s).transpose());
  Vector out(mdp.n_actions);
  for (int a = 0; a < mdp.n_actions; ++a) out(a) = (f(a) - avg) * pi(s, a);
  return out;
}

}  // namespace mfpg
