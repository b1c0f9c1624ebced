#pragma once

#include "mfpg/types.hpp"

#include <span>

namespace mfpg {

/// Normalized Gaussian potential U(theta) = (d/2) ln(2 pi s^2) + |theta - m|^2 / (2 s^2),
/// so e^{-U} is the N(m, s^2 I) density.
class GaussianPrior {
 public:
  GaussianPrior(Vector mean, double scale);
  GaussianPrior(int dim, double mean, double scale);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  double scale() const { return scale_; }

  double value(std::span<const double> theta) const;
  void gradient(std::span<const double> theta, std::span<double> out) const;

  // |grad U(theta)| <= C_U (1 + |theta|)
  double growth_constant() const;
  double lipschitz_constant() const { return 1.0 / (scale_ * scale_); }
  double dissipativity() const { return 1.0 / (scale_ * scale_); }

 private:
  Vector mean_;
  double scale_;
};

}  // namespace mfpg
