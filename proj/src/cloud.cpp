#include "mfpg/cloud.hpp"

#include <cmath>

namespace mfpg {

ParticleCloud ParticleCloud::uniform(RowMatrix particles) {
  ParticleCloud out;
  const long m = particles.rows();
  out.particles = std::move(particles);
  out.weights = Vector::Constant(m, m > 0 ? 1.0 / static_cast<double>(m) : 0.0);
  return out;
}

bool ParticleCloud::has_uniform_weights(double tol) const {
  if (size() == 0) return false;
  const double w = 1.0 / size();
  return ((weights.array() - w).abs() <= tol).all();
}

Vector ParticleCloud::mean() const {
  Vector out = Vector::Zero(dim());
  for (int i = 0; i < size(); ++i) out += weights(i) * particles.row(i).transpose();
  return out;
}

Matrix ParticleCloud::covariance() const {
  const Vector centre = mean();
  Matrix out = Matrix::Zero(dim(), dim());
  for (int i = 0; i < size(); ++i) {
    const Vector diff = particles.row(i).transpose() - centre;
    out.noalias() += weights(i) * diff * diff.transpose();
  }
  return out;
}

void require_valid(const ParticleCloud& cloud) {
  if (cloud.size() < 1 || cloud.dim() < 1) throw ValidationError("particle cloud must be nonempty");
  if (cloud.weights.size() != cloud.size()) throw ValidationError("particle cloud: weight count mismatch");
  if ((cloud.weights.array() < 0.0).any()) throw ValidationError("particle cloud: negative weight");
  if (std::abs(cloud.weights.sum() - 1.0) > 1e-12) throw ValidationError("particle cloud: weights must sum to 1");
  if (!cloud.particles.allFinite()) throw ValidationError("particle cloud: non-finite particle");
}

}  // namespace mfpg
