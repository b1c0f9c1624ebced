#include "mfpg/features.hpp"

#include "mfpg/rng.hpp"

#include <algorithm>
#include <cmath>

namespace mfpg {

double psi(double u, double cap) { return cap * std::tanh(u / cap); }

double psi_prime(double u, double cap) {
  const double t = std::tanh(u / cap);
  return 1.0 - t * t;
}

double psi_second(double u, double cap) {
  const double t = std::tanh(u / cap);
  return -2.0 * t * (1.0 - t * t) / cap;
}

void FeatureMap::values(std::span<const double> theta, Matrix& out) const {
  out.resize(n_states(), n_actions());
  for (int s = 0; s < n_states(); ++s) {
    for (int a = 0; a < n_actions(); ++a) out(s, a) = value(theta, s, a);
  }
}

void FeatureMap::contract_gradient(std::span<const double> theta, const Matrix& coeff, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> g(param_dim());
  for (int s = 0; s < n_states(); ++s) {
    for (int a = 0; a < n_actions(); ++a) {
      const double c = coeff(s, a);
      if (c == 0.0) continue;
      gradient(theta, s, a, g);
      for (int k = 0; k < param_dim(); ++k) out[k] += c * g[k];
    }
  }
}

// ---------------------------------------------------------------------------

OneHiddenLayerFeature::OneHiddenLayerFeature(int n_states, int n_actions, int hidden_dim, double scale_cap)
    : n_states_(n_states), n_actions_(n_actions), hidden_(hidden_dim), cap_(scale_cap) {
  if (n_states <= 0 || n_actions <= 0) throw ValidationError("one_hidden: state/action counts must be positive");
  if (hidden_dim <= 0) throw ValidationError("one_hidden: hidden_dim must be positive");
  if (!(scale_cap > 0.0)) throw ValidationError("one_hidden: scale_cap must be positive");
}

double OneHiddenLayerFeature::preactivation(std::span<const double> theta, int unit, int s, int a) const {
  const double* w = theta.data() + unit * (1 + input_dim()) + 1;
  return w[s] + w[n_states_ + a] + w[n_states_ + n_actions_];
}

FeatureNorms OneHiddenLayerFeature::norms() const {
  const double h = hidden_;
  const double c = cap_;
  FeatureNorms n;
  n.a0 = h * c;
  n.a1 = std::max(n.a0, std::sqrt(h * (1.0 + 3.0 * c * c)));
  const double k = kTanhSecondSup;
  n.a2 = std::max(n.a1, std::sqrt((k / c) * (k / c) + 6.0 + 9.0 * c * c * k * k));
  return n;
}

double OneHiddenLayerFeature::value(std::span<const double> theta, int s, int a) const {
  double acc = 0.0;
  const int stride = 1 + input_dim();
  for (int j = 0; j < hidden_; ++j) acc += psi(theta[j * stride], cap_) * std::tanh(preactivation(theta, j, s, a));
  return acc;
}

void OneHiddenLayerFeature::gradient(std::span<const double> theta, int s, int a, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const int stride = 1 + input_dim();
  for (int j = 0; j < hidden_; ++j) {
    const double u = theta[j * stride];
    const double t = std::tanh(preactivation(theta, j, s, a));
    const double outer = psi(u, cap_) * (1.0 - t * t);
    double* g = out.data() + j * stride;
    g[0] = psi_prime(u, cap_) * t;
    g[1 + s] = outer;
    g[1 + n_states_ + a] = outer;
    g[1 + n_states_ + n_actions_] = outer;
  }
}

void OneHiddenLayerFeature::values(std::span<const double> theta, Matrix& out) const {
  out.setZero(n_states_, n_actions_);
  const int stride = 1 + input_dim();
  for (int j = 0; j < hidden_; ++j) {
    const double scale = psi(theta[j * stride], cap_);
    for (int s = 0; s < n_states_; ++s) {
      for (int a = 0; a < n_actions_; ++a) out(s, a) += scale * std::tanh(preactivation(theta, j, s, a));
    }
  }
}

void OneHiddenLayerFeature::contract_gradient(std::span<const double> theta, const Matrix& coeff,
                                              std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const int stride = 1 + input_dim();
  for (int j = 0; j < hidden_; ++j) {
    const double u = theta[j * stride];
    const double amp = psi(u, cap_);
    double* g = out.data() + j * stride;
    double value_sum = 0.0;
    double bias_sum = 0.0;
    for (int s = 0; s < n_states_; ++s) {
      for (int a = 0; a < n_actions_; ++a) {
        const double c = coeff(s, a);
        const double t = std::tanh(preactivation(theta, j, s, a));
        const double slope = c * (1.0 - t * t);
        value_sum += c * t;
        g[1 + s] += slope;
        g[1 + n_states_ + a] += slope;
        bias_sum += slope;
      }
    }
    g[0] = psi_prime(u, cap_) * value_sum;
    for (int k = 1; k < stride - 1; ++k) g[k] *= amp;
    g[stride - 1] = amp * bias_sum;
  }
}

// ---------------------------------------------------------------------------

namespace {

Matrix draw_table(int n_actions, int dim, std::uint64_t seed) {
  if (n_actions <= 0 || dim <= 0) throw ValidationError("random_tanh: action count and dimension must be positive");
  CounterRng rng(seed, Stream::feature_table);
  Matrix g(n_actions, dim);
  for (int a = 0; a < n_actions; ++a) {
    for (int k = 0; k < dim; ++k) g(a, k) = rng.normal(a, k);
  }
  return g;
}

}  // namespace

RandomTanhFeature::RandomTanhFeature(int n_states, int n_actions, int dim, double scale_cap, std::uint64_t seed)
    : RandomTanhFeature(n_states, draw_table(n_actions, dim, seed), scale_cap) {}

RandomTanhFeature::RandomTanhFeature(int n_states, Matrix table, double scale_cap)
    : n_states_(n_states), table_(std::move(table)), cap_(scale_cap) {
  if (n_states <= 0) throw ValidationError("random_tanh: n_states must be positive");
  if (table_.rows() <= 0 || table_.cols() <= 0) throw ValidationError("random_tanh: empty feature table");
  if (!(scale_cap > 0.0)) throw ValidationError("random_tanh: scale_cap must be positive");
  activated_ = table_.array().tanh().matrix();
}

FeatureNorms RandomTanhFeature::norms() const {
  FeatureNorms n;
  const Vector abs_sum = activated_.cwiseAbs().rowwise().sum();
  const Vector sq_sum = activated_.array().square().rowwise().sum().matrix();
  n.a0 = cap_ * abs_sum.maxCoeff();
  n.a1 = std::max(n.a0, std::sqrt(sq_sum.maxCoeff()));
  n.a2 = std::max(n.a1, (kTanhSecondSup / cap_) * activated_.cwiseAbs().maxCoeff());
  return n;
}

double RandomTanhFeature::value(std::span<const double> theta, int, int a) const {
  double acc = 0.0;
  for (int k = 0; k < param_dim(); ++k) acc += psi(theta[k], cap_) * activated_(a, k);
  return acc;
}

void RandomTanhFeature::gradient(std::span<const double> theta, int, int a, std::span<double> out) const {
  for (int k = 0; k < param_dim(); ++k) out[k] = psi_prime(theta[k], cap_) * activated_(a, k);
}

// ---------------------------------------------------------------------------

ClippedQuadraticFeature::ClippedQuadraticFeature(std::vector<double> grid, double lambda, double tau, double centre,
                                                 double half_width)
    : grid_(std::move(grid)), scale_(lambda / tau), centre_(centre), half_width_(half_width) {
  if (grid_.empty()) throw ValidationError("clipped_quadratic: empty grid");
  if (!(lambda > 0.0) || !(tau > 0.0)) throw ValidationError("clipped_quadratic: lambda and tau must be positive");
  if (!(half_width > 0.0)) throw ValidationError("clipped_quadratic: half width must be positive");
}

double ClippedQuadraticFeature::saturated_centre(double theta) const {
  return centre_ + half_width_ * std::tanh((theta - centre_) / half_width_);
}

FeatureNorms ClippedQuadraticFeature::norms() const {
  double spread = 0.0;
  for (double x : grid_) spread = std::max(spread, std::abs(x - centre_));
  const double reach = spread + half_width_;
  FeatureNorms n;
  n.a0 = scale_ * reach * reach;
  n.a1 = std::max(n.a0, 2.0 * scale_ * reach);
  n.a2 = std::max(n.a1, 2.0 * scale_ * (1.0 + reach * kTanhSecondSup / half_width_));
  return n;
}

double ClippedQuadraticFeature::value(std::span<const double> theta, int, int a) const {
  const double diff = grid_[a] - saturated_centre(theta[0]);
  return -scale_ * diff * diff;
}

void ClippedQuadraticFeature::gradient(std::span<const double> theta, int, int a, std::span<double> out) const {
  const double t = std::tanh((theta[0] - centre_) / half_width_);
  const double c = centre_ + half_width_ * t;
  out[0] = 2.0 * scale_ * (grid_[a] - c) * (1.0 - t * t);
}

void ClippedQuadraticFeature::values(std::span<const double> theta, Matrix& out) const {
  const double c = saturated_centre(theta[0]);
  out.resize(1, n_actions());
  for (int a = 0; a < n_actions(); ++a) out(0, a) = -scale_ * (grid_[a] - c) * (grid_[a] - c);
}

void ClippedQuadraticFeature::contract_gradient(std::span<const double> theta, const Matrix& coeff,
                                                std::span<double> out) const {
  const double t = std::tanh((theta[0] - centre_) / half_width_);
  const double c = centre_ + half_width_ * t;
  double acc = 0.0;
  for (int a = 0; a < n_actions(); ++a) acc += coeff(0, a) * (grid_[a] - c);
  out[0] = 2.0 * scale_ * (1.0 - t * t) * acc;
}

// ---------------------------------------------------------------------------

TableFeature::TableFeature(Matrix table, int param_dim) : table_(std::move(table)), dim_(param_dim) {
  if (param_dim <= 0) throw ValidationError("table feature: param_dim must be positive");
}

FeatureNorms TableFeature::norms() const {
  const double sup = table_.size() ? table_.cwiseAbs().maxCoeff() : 0.0;
  return {sup, sup, sup};
}

double TableFeature::value(std::span<const double>, int s, int a) const { return table_(s, a); }

void TableFeature::gradient(std::span<const double>, int, int, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

}  // namespace mfpg
