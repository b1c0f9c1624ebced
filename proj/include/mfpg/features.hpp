#pragma once

#include "mfpg/types.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mfpg {

/// Declared |f|_{A_k} for k = 0, 1, 2. Each norm is the max over derivative
/// orders 0..k of the sup of |grad^j f|, so a0 <= a1 <= a2.
struct FeatureNorms {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
};

/// f(theta, s, a) with analytic theta-gradient.
class FeatureMap {
 public:
  virtual ~FeatureMap() = default;

  virtual int param_dim() const = 0;
  virtual int n_states() const = 0;
  virtual int n_actions() const = 0;
  virtual std::string kind() const = 0;
  virtual FeatureNorms norms() const = 0;

  virtual double value(std::span<const double> theta, int s, int a) const = 0;
  virtual void gradient(std::span<const double> theta, int s, int a, std::span<double> out) const = 0;

  // f(theta, ., .) as an nS x nA matrix.
  virtual void values(std::span<const double> theta, Matrix& out) const;

  // out = sum_{s,a} coeff(s,a) grad f(theta,s,a).
  virtual void contract_gradient(std::span<const double> theta, const Matrix& coeff, std::span<double> out) const;
};

// Smooth bounded rescaling psi(u) = C tanh(u / C) and its derivatives.
double psi(double u, double cap);
double psi_prime(double u, double cap);
double psi_second(double u, double cap);

// sup_x |tanh''(x)| = sup 2 sech^2 tanh = 4/(3 sqrt 3).
inline constexpr double kTanhSecondSup = 0.769800358919501;

/// H hidden units per particle, f = sum_j psi(theta0_j) tanh(theta1_j . x(s,a)),
/// x = (onehot(s), onehot(a), 1). Particle layout per unit: [theta0_j, theta1_j].
class OneHiddenLayerFeature final : public FeatureMap {
 public:
  OneHiddenLayerFeature(int n_states, int n_actions, int hidden_dim, double scale_cap = 1.0);

  int param_dim() const override { return hidden_ * (1 + input_dim()); }
  int n_states() const override { return n_states_; }
  int n_actions() const override { return n_actions_; }
  std::string kind() const override { return "one_hidden"; }
  FeatureNorms norms() const override;

  double value(std::span<const double> theta, int s, int a) const override;
  void gradient(std::span<const double> theta, int s, int a, std::span<double> out) const override;
  void values(std::span<const double> theta, Matrix& out) const override;
  void contract_gradient(std::span<const double> theta, const Matrix& coeff, std::span<double> out) const override;

  int input_dim() const { return n_states_ + n_actions_ + 1; }
  int hidden_dim() const { return hidden_; }
  double scale_cap() const { return cap_; }

 private:
  double preactivation(std::span<const double> theta, int unit, int s, int a) const;

  int n_states_;
  int n_actions_;
  int hidden_;
  double cap_;
};

/// State-independent random-feature form f = sum_k psi(theta_k) tanh(g_k(a)),
/// with g[a] in R^d drawn once from a seeded standard normal.
class RandomTanhFeature final : public FeatureMap {
 public:
  RandomTanhFeature(int n_states, int n_actions, int dim, double scale_cap, std::uint64_t seed);
  RandomTanhFeature(int n_states, Matrix table, double scale_cap);  // table is nA x d

  int param_dim() const override { return static_cast<int>(table_.cols()); }
  int n_states() const override { return n_states_; }
  int n_actions() const override { return static_cast<int>(table_.rows()); }
  std::string kind() const override { return "random_tanh"; }
  FeatureNorms norms() const override;

  double value(std::span<const double> theta, int s, int a) const override;
  void gradient(std::span<const double> theta, int s, int a, std::span<double> out) const override;

  const Matrix& activations() const { return activated_; }  // tanh(g), nA x d

 private:
  int n_states_;
  Matrix table_;
  Matrix activated_;
  double cap_;
};

/// One-state, one-parameter feature on an action grid:
/// f(theta, a) = -(lambda/tau) (x_a - c(theta))^2 with the saturated centre
/// c(theta) = centre + h tanh((theta - centre)/h).
class ClippedQuadraticFeature final : public FeatureMap {
 public:
  ClippedQuadraticFeature(std::vector<double> grid, double lambda, double tau, double centre, double half_width);

  int param_dim() const override { return 1; }
  int n_states() const override { return 1; }
  int n_actions() const override { return static_cast<int>(grid_.size()); }
  std::string kind() const override { return "clipped_quadratic"; }
  FeatureNorms norms() const override;

  double value(std::span<const double> theta, int s, int a) const override;
  void gradient(std::span<const double> theta, int s, int a, std::span<double> out) const override;
  void values(std::span<const double> theta, Matrix& out) const override;
  void contract_gradient(std::span<const double> theta, const Matrix& coeff, std::span<double> out) const override;

  double saturated_centre(double theta) const;
  const std::vector<double>& grid() const { return grid_; }

 private:
  std::vector<double> grid_;
  double scale_;  // lambda / tau
  double centre_;
  double half_width_;
};

/// Feature whose value ignores theta; useful for degenerate-gradient checks.
class TableFeature final : public FeatureMap {
 public:
  TableFeature(Matrix table, int param_dim);

  int param_dim() const override { return dim_; }
  int n_states() const override { return static_cast<int>(table_.rows()); }
  int n_actions() const override { return static_cast<int>(table_.cols()); }
  std::string kind() const override { return "table"; }
  FeatureNorms norms() const override;

  double value(std::span<const double> theta, int s, int a) const override;
  void gradient(std::span<const double> theta, int s, int a, std::span<double> out) const override;

 private:
  Matrix table_;
  int dim_;
};

}  // namespace mfpg
