#pragma once

#include "mfpg/types.hpp"

#include <span>

namespace mfpg {

/// Weighted empirical measure sum_i w_i delta_{theta_i}; particles are rows.
struct ParticleCloud {
  RowMatrix particles;  // m x d
  Vector weights;       // m, sums to 1

  static ParticleCloud uniform(RowMatrix particles);

  int size() const { return static_cast<int>(particles.rows()); }
  int dim() const { return static_cast<int>(particles.cols()); }

  std::span<const double> particle(int i) const {
    return {particles.data() + static_cast<long>(i) * particles.cols(), static_cast<std::size_t>(particles.cols())};
  }
  std::span<double> particle(int i) {
    return {particles.data() + static_cast<long>(i) * particles.cols(), static_cast<std::size_t>(particles.cols())};
  }

  bool has_uniform_weights(double tol = 1e-12) const;
  Vector mean() const;
  // Weighted population covariance sum_i w_i (theta_i - mean)(theta_i - mean)^T.
  Matrix covariance() const;
};

/// Throws ValidationError unless m >= 1, weights nonnegative and summing to 1.
void require_valid(const ParticleCloud& cloud);

}  // namespace mfpg
