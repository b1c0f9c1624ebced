#include "mfpg/estimators.hpp"

#include "mfpg/parallel.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace mfpg {

namespace {

constexpr int kNeighbours = 3;

}  // namespace

double log_unit_ball_volume(int d) {
  return 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1.0);
}

double gaussian_proxy_kl(const ParticleCloud& cloud, const GaussianPrior& prior) {
  require_valid(cloud);
  const int d = cloud.dim();
  if (prior.dim() != d) throw ValidationError("kl_estimate: prior dimension mismatch");
  if (cloud.size() <= d) throw NumericalError("gaussian_proxy needs more particles than dimensions");
  const double var = prior.scale() * prior.scale();
  const Matrix ratio = cloud.covariance() / var;
  const Eigen::LDLT<Matrix> ldlt(ratio);
  const Vector diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !(diag.minCoeff() > 1e-300)) {
    throw NumericalError("gaussian_proxy: singular sample covariance");
  }
  const double log_det = diag.array().log().sum();
  const double shift = (cloud.mean() - prior.mean()).squaredNorm() / var;
  return 0.5 * (ratio.trace() + shift - d - log_det);
}

Vector knn_distances(const ParticleCloud& cloud, int k) {
  const int m = cloud.size();
  if (k < 1 || k >= m) throw ValidationError("knn: need 1 <= k < m");
  Vector out(m);
  parallel_for(m, [&](std::size_t i) {
    // Sorted k smallest squared distances.
    std::vector<double> best(k, std::numeric_limits<double>::infinity());
    const auto xi = cloud.particles.row(static_cast<long>(i));
    for (int j = 0; j < m; ++j) {
      if (j == static_cast<int>(i)) continue;
      const double sq = (cloud.particles.row(j) - xi).squaredNorm();
      if (sq >= best[k - 1]) continue;
      int pos = k - 1;
      while (pos > 0 && best[pos - 1] > sq) {
        best[pos] = best[pos - 1];
        --pos;
      }
      best[pos] = sq;
    }
    out(static_cast<long>(i)) = std::sqrt(best[k - 1]);
  });
  return out;
}

double knn_entropy(const ParticleCloud& cloud, int k) {
  require_valid(cloud);
  const int m = cloud.size();
  const int d = cloud.dim();
  if (m < 10) throw ValidationError("knn estimator needs m >= 10");
  const Vector eps = knn_distances(cloud, k);
  if (!(eps.minCoeff() > 0.0)) throw NumericalError("knn estimator: coincident particles");
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += cloud.weights(i) * std::log(eps(i));
  using boost::math::digamma;
  return digamma(static_cast<double>(m)) - digamma(static_cast<double>(k)) + log_unit_ball_volume(d) + d * acc;
}

KlEstimate kl_estimate_report(const ParticleCloud& cloud, const GaussianPrior& prior, KlMethod method) {
  require_valid(cloud);
  if (prior.dim() != cloud.dim()) throw ValidationError("kl_estimate: prior dimension mismatch");
  KlEstimate out;
  if (method == KlMethod::gaussian_proxy) {
    try {
      out.value = gaussian_proxy_kl(cloud, prior);
      out.method = KlMethod::gaussian_proxy;
      return out;
    } catch (const NumericalError&) {
      out.fell_back = true;
    }
  }
  double cross = 0.0;
  for (int i = 0; i < cloud.size(); ++i) cross += cloud.weights(i) * prior.value(cloud.particle(i));
  out.value = cross - knn_entropy(cloud, kNeighbours);
  out.method = KlMethod::knn;
  return out;
}

double kl_estimate(const ParticleCloud& cloud, const GaussianPrior& prior, KlMethod method) {
  return kl_estimate_report(cloud, prior, method).value;
}

Vector gaussian_log_density(const ParticleCloud& cloud) {
  require_valid(cloud);
  const int d = cloud.dim();
  if (cloud.size() <= d) throw NumericalError("moment-matched density needs more particles than dimensions");
  const Matrix cov = cloud.covariance();
  const Eigen::LDLT<Matrix> ldlt(cov);
  const Vector diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !(diag.minCoeff() > 1e-300)) {
    throw NumericalError("moment-matched density: singular covariance");
  }
  const double log_det = diag.array().log().sum();
  const Vector centre = cloud.mean();
  const double norm = -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det);
  Vector out(cloud.size());
  for (int i = 0; i < cloud.size(); ++i) {
    const Vector diff = cloud.particles.row(i).transpose() - centre;
    out(i) = norm - 0.5 * diff.dot(ldlt.solve(diff));
  }
  return out;
}

Vector knn_log_density(const ParticleCloud& cloud, int k) {
  require_valid(cloud);
  const int m = cloud.size();
  const int d = cloud.dim();
  if (m < 10) throw ValidationError("knn density needs m >= 10");
  const Vector eps = knn_distances(cloud, k);
  if (!(eps.minCoeff() > 0.0)) throw NumericalError("knn density: coincident particles");
  using boost::math::digamma;
  const double base = digamma(static_cast<double>(k)) - digamma(static_cast<double>(m)) - log_unit_ball_volume(d);
  Vector out(m);
  for (int i = 0; i < m; ++i) out(i) = base - d * std::log(eps(i));
  return out;
}

std::string to_string(KlMethod method) { return method == KlMethod::knn ? "knn" : "gaussian_proxy"; }

KlMethod parse_kl_method(const std::string& name) {
  if (name == "gaussian_proxy") return KlMethod::gaussian_proxy;
  if (name == "knn") return KlMethod::knn;
  throw ValidationError("unknown kl method '" + name + "'");
}

}  // namespace mfpg
