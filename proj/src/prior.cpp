#include "mfpg/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mfpg {

GaussianPrior::GaussianPrior(Vector mean, double scale) : mean_(std::move(mean)), scale_(scale) {
  if (mean_.size() < 1) throw ValidationError("prior: dimension must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("prior: scale must be positive");
  if (!mean_.allFinite()) throw ValidationError("prior: mean must be finite");
}

GaussianPrior::GaussianPrior(int dim, double mean, double scale)
    : GaussianPrior(Vector::Constant(std::max(dim, 0), mean), scale) {}

double GaussianPrior::value(std::span<const double> theta) const {
  double sq = 0.0;
  for (int k = 0; k < dim(); ++k) {
    const double diff = theta[k] - mean_(k);
    sq += diff * diff;
  }
  const double var = scale_ * scale_;
  return 0.5 * dim() * std::log(2.0 * std::numbers::pi * var) + sq / (2.0 * var);
}

void GaussianPrior::gradient(std::span<const double> theta, std::span<double> out) const {
  const double var = scale_ * scale_;
  for (int k = 0; k < dim(); ++k) out[k] = (theta[k] - mean_(k)) / var;
}

double GaussianPrior::growth_constant() const {
  return std::max(1.0, mean_.norm()) / (scale_ * scale_);
}

}  // namespace mfpg
