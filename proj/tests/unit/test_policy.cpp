#include "doctest.h"
#include "generators.hpp"
#include "mfpg/features.hpp"
#include "mfpg/policy.hpp"
#include "mfpg/wasserstein.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

using namespace mfpg;
using namespace testsupport;

namespace {

std::vector<std::unique_ptr<FeatureMap>> builtin_features(Rng& rng) {
  std::vector<std::unique_ptr<FeatureMap>> out;
  out.push_back(std::make_unique<OneHiddenLayerFeature>(3, 2, 2, 1.0));
  out.push_back(std::make_unique<OneHiddenLayerFeature>(2, 4, 3, 0.5));
  out.push_back(std::make_unique<RandomTanhFeature>(3, 4, 5, 1.0, rng()));
  out.push_back(std::make_unique<RandomTanhFeature>(2, 3, 2, 2.0, rng()));
  std::vector<double> grid;
  for (int j = 0; j < 32; ++j) grid.push_back(-1.0 + j * 0.1);
  out.push_back(std::make_unique<ClippedQuadraticFeature>(grid, 0.5, 1.0, 0.5, 2.0));
  return out;
}

std::vector<double> random_theta(Rng& rng, int d, double spread) {
  std::vector<double> t(d);
  for (double& x : t) x = normal(rng, 0.0, spread);
  return t;
}

Matrix fd_hessian(const FeatureMap& f, std::vector<double> theta, int s, int a, double h = 1e-4) {
  const int d = f.param_dim();
  Matrix hess(d, d);
  std::vector<double> up(d), down(d);
  for (int k = 0; k < d; ++k) {
    const double keep = theta[k];
    theta[k] = keep + h;
    f.gradient(theta, s, a, up);
    theta[k] = keep - h;
    f.gradient(theta, s, a, down);
    theta[k] = keep;
    for (int j = 0; j < d; ++j) hess(j, k) = (up[j] - down[j]) / (2 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

FiniteMdp mdp_for(Rng& rng, const FeatureMap& f, double gamma = 0.8) {
  return random_mdp(rng, {f.n_states(), f.n_actions(), gamma});
}

}  // namespace

TEST_CASE("features: declared A_k norms dominate sampled values, gradients and Hessians") {
  Rng rng(71);
  for (const auto& f : builtin_features(rng)) {
    CAPTURE(f->kind());
    const FeatureNorms n = f->norms();
    CHECK(n.a0 <= n.a1);
    CHECK(n.a1 <= n.a2);
    std::vector<double> g(f->param_dim());
    for (int trial = 0; trial < 1000; ++trial) {
      const auto theta = random_theta(rng, f->param_dim(), trial % 2 ? 5.0 : 1.0);
      const int s = uniform_int(rng, 0, f->n_states() - 1);
      const int a = uniform_int(rng, 0, f->n_actions() - 1);
      CHECK(std::abs(f->value(theta, s, a)) <= n.a0);
      f->gradient(theta, s, a, g);
      double norm = 0.0;
      for (double x : g) norm += x * x;
      CHECK(std::sqrt(norm) <= n.a1);
      if (trial % 10 == 0) {
        const Matrix hess = fd_hessian(*f, theta, s, a);
        const double op = Eigen::SelfAdjointEigenSolver<Matrix>(hess).eigenvalues().cwiseAbs().maxCoeff();
        CHECK(op <= n.a2 + 1e-6);
      }
    }
  }
}

TEST_CASE("features: analytic gradient matches central differences") {
  Rng rng(73);
  for (const auto& f : builtin_features(rng)) {
    CAPTURE(f->kind());
    std::vector<double> g(f->param_dim());
    for (int trial = 0; trial < 100; ++trial) {
      const auto theta = random_theta(rng, f->param_dim(), 1.5);
      const int s = uniform_int(rng, 0, f->n_states() - 1);
      const int a = uniform_int(rng, 0, f->n_actions() - 1);
      f->gradient(theta, s, a, g);
      const auto fd = fd_feature_gradient(*f, theta, s, a);
      double err = 0.0, scale = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        err = std::max(err, std::abs(g[k] - fd[k]));
        scale = std::max(scale, std::abs(g[k]));
      }
      CHECK(err <= 1e-6 * std::max(scale, 1.0));
    }
  }
}

TEST_CASE("features: specialised values and contractions agree with per-entry calls") {
  Rng rng(79);
  for (const auto& f : builtin_features(rng)) {
    CAPTURE(f->kind());
    const int d = f->param_dim();
    const auto theta = random_theta(rng, d, 1.0);
    Matrix vals;
    f->values(theta, vals);
    Matrix coeff(f->n_states(), f->n_actions());
    for (int s = 0; s < f->n_states(); ++s)
      for (int a = 0; a < f->n_actions(); ++a) coeff(s, a) = normal(rng);
    std::vector<double> contracted(d), g(d), expected(d, 0.0);
    f->contract_gradient(theta, coeff, contracted);
    for (int s = 0; s < f->n_states(); ++s)
      for (int a = 0; a < f->n_actions(); ++a) {
        CHECK(vals(s, a) == doctest::Approx(f->value(theta, s, a)).epsilon(1e-13));
        f->gradient(theta, s, a, g);
        for (int k = 0; k < d; ++k) expected[k] += coeff(s, a) * g[k];
      }
    for (int k = 0; k < d; ++k) CHECK(contracted[k] == doctest::Approx(expected[k]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("features: random table is seeded and invalid parameters are rejected") {
  const RandomTanhFeature a(2, 3, 4, 1.0, 99), b(2, 3, 4, 1.0, 99), c(2, 3, 4, 1.0, 100);
  CHECK((a.activations() - b.activations()).norm() == 0.0);
  CHECK((a.activations() - c.activations()).norm() > 0.0);
  CHECK_THROWS_AS(OneHiddenLayerFeature(2, 2, 0, 1.0), ValidationError);
  CHECK_THROWS_AS(OneHiddenLayerFeature(2, 2, 2, 0.0), ValidationError);
  CHECK_THROWS_AS(RandomTanhFeature(2, 2, 2, -1.0, 1), ValidationError);
}

TEST_CASE("cloud: uniform weights, moments and validation") {
  RowMatrix x(3, 2);
  x << 0, 0, 1, 2, 2, 4;
  const ParticleCloud c = ParticleCloud::uniform(x);
  CHECK(c.has_uniform_weights());
  CHECK(c.mean()(0) == doctest::Approx(1.0));
  CHECK(c.mean()(1) == doctest::Approx(2.0));
  CHECK(c.covariance()(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(c.covariance()(0, 1) == doctest::Approx(4.0 / 3));
  ParticleCloud bad = c;
  bad.weights(0) = -0.1;
  CHECK_THROWS_AS(require_valid(bad), ValidationError);
  bad = c;
  bad.weights *= 2.0;
  CHECK_THROWS_AS(require_valid(bad), ValidationError);
}

TEST_CASE("policy_from_cloud: zero feature gives the normalised reference measure") {
  Rng rng(83);
  const FiniteMdp mdp = random_mdp(rng, {3, 4, 0.5});
  const TableFeature zero(Matrix::Zero(3, 4), 2);
  const TabularPolicy pi = policy_from_cloud(random_cloud(rng, 5, 2), zero, mdp);
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 4; ++a) CHECK(pi.probs(s, a) == doctest::Approx(mdp.mu(a) / mdp.mu_total()).epsilon(1e-15));
}

TEST_CASE("policy_from_cloud: logits (ln 2, 0) give (2/3, 1/3)") {
  const FiniteMdp mdp = one_state_mdp({0.0, 0.0}, {1.0, 1.0});
  Matrix table(1, 2);
  table << std::numbers::ln2, 0.0;
  const TableFeature f(table, 1);
  const ParticleCloud single = ParticleCloud::uniform(RowMatrix::Zero(1, 1));
  const TabularPolicy pi = policy_from_cloud(single, f, mdp);
  CHECK(pi.probs(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(pi.probs(0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("policy_from_cloud: permutation invariance, positivity, loop oracle") {
  Rng rng(89);
  const OneHiddenLayerFeature f(3, 3, 2, 1.0);
  const FiniteMdp mdp = mdp_for(rng, f);
  for (int trial = 0; trial < 20; ++trial) {
    const ParticleCloud c = random_cloud(rng, 12, f.param_dim(), 2.0);
    std::vector<int> order(12);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    RowMatrix shuffled(12, f.param_dim());
    for (int i = 0; i < 12; ++i) shuffled.row(i) = c.particles.row(order[i]);
    const TabularPolicy pi = policy_from_cloud(c, f, mdp);
    const TabularPolicy pj = policy_from_cloud(ParticleCloud::uniform(shuffled), f, mdp);
    CHECK((pi.probs - pj.probs).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(pi.strictly_positive());
    CHECK((pi.probs.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    const TabularPolicy oracle = softmax_by_loops(logits_by_loops(particles_of(c), weights_of(c), f), mdp);
    CHECK((pi.probs - oracle.probs).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("policy_from_cloud: dimension mismatch rejected") {
  Rng rng(90);
  const OneHiddenLayerFeature f(3, 3, 2, 1.0);
  const FiniteMdp mdp = random_mdp(rng, {2, 3, 0.5});
  CHECK_THROWS_AS(policy_from_cloud(random_cloud(rng, 3, f.param_dim()), f, mdp), ValidationError);
  const FiniteMdp ok = mdp_for(rng, f);
  CHECK_THROWS_AS(policy_from_cloud(random_cloud(rng, 3, f.param_dim() + 1), f, ok), ValidationError);
}

TEST_CASE("log_density: unit reference mass and zero feature give zeros") {
  const FiniteMdp mdp = one_state_mdp({0.0, 1.0, 2.0, 3.0}, {0.25, 0.25, 0.25, 0.25});
  const TableFeature zero(Matrix::Zero(1, 4), 1);
  const Matrix l = log_density(policy_from_cloud(ParticleCloud::uniform(RowMatrix::Zero(2, 1)), zero, mdp), mdp);
  CHECK(l.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("log_density: random-feature policies stay within 2|f|_A0 + |ln mu(A)|") {
  Rng rng(97);
  const RandomTanhFeature f(2, 3, 1, 1.0, 5);  // |psi| <= 1 and |tanh g| <= 1
  FiniteMdp mdp = random_mdp(rng, {2, 3, 0.7});
  mdp.mu << 0.5, 1.0, 0.5;  // mu(A) = 2
  const double bound = 2.0 + std::numbers::ln2;
  const double tight = 2.0 * f.norms().a0 + std::numbers::ln2;
  for (int trial = 0; trial < 1000; ++trial) {
    const ParticleCloud c = random_cloud(rng, uniform_int(rng, 1, 6), 1, 4.0);
    const Matrix l = log_density(policy_from_cloud(c, f, mdp), mdp);
    CHECK(l.cwiseAbs().maxCoeff() <= bound);
    CHECK(l.cwiseAbs().maxCoeff() <= tight + 1e-12);
  }
}

TEST_CASE("policy_functional_derivative: action-constant feature gives zero") {
  Rng rng(101);
  Matrix table(2, 3);
  table << 1.5, 1.5, 1.5, -2.0, -2.0, -2.0;
  const TableFeature f(table, 2);
  const FiniteMdp mdp = random_mdp(rng, {2, 3, 0.5});
  const ParticleCloud c = random_cloud(rng, 4, 2);
  const std::vector<double> theta = {0.3, -0.2};
  for (int s = 0; s < 2; ++s) CHECK(policy_functional_derivative(c, f, mdp, theta, s).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("policy_functional_derivative: entries sum to zero") {
  Rng rng(103);
  for (const auto& f : builtin_features(rng)) {
    const FiniteMdp mdp = mdp_for(rng, *f);
    for (int trial = 0; trial < 20; ++trial) {
      const ParticleCloud c = random_weighted_cloud(rng, 5, f->param_dim());
      const auto theta = random_theta(rng, f->param_dim(), 1.0);
      for (int s = 0; s < f->n_states(); ++s) CHECK(std::abs(policy_functional_derivative(c, *f, mdp, theta, s).sum()) < 1e-12);
    }
  }
}

TEST_CASE("policy_functional_derivative: mixture finite difference within 1e-5") {
  Rng rng(107);
  for (const auto& f : builtin_features(rng)) {
    CAPTURE(f->kind());
    const FiniteMdp mdp = mdp_for(rng, *f);
    for (int trial = 0; trial < 10; ++trial) {
      const ParticleCloud c = random_weighted_cloud(rng, 4, f->param_dim());
      const auto theta = random_theta(rng, f->param_dim(), 1.0);
      for (int s = 0; s < f->n_states(); ++s) {
        // the mixture direction delta_theta - nu sees the kernel minus its nu-average
        Vector analytic = policy_functional_derivative(c, *f, mdp, theta, s);
        for (int i = 0; i < c.size(); ++i)
          analytic -= c.weights(i) * policy_functional_derivative(c, *f, mdp, c.particle(i), s);
        const Vector fd = fd_policy_derivative(mdp, *f, c, theta, s);
        const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-3);
        CHECK((analytic - fd).cwiseAbs().maxCoeff() / scale < 1e-5);
      }
    }
  }
}

TEST_CASE("policy and occupancy are Lipschitz in W1") {
  Rng rng(109);
  for (int trial = 0; trial < 100; ++trial) {
    const int variant = trial % 3;
    std::unique_ptr<FeatureMap> f;
    if (variant == 0) f = std::make_unique<OneHiddenLayerFeature>(3, 2, 2, 1.0);
    if (variant == 1) f = std::make_unique<RandomTanhFeature>(2, 4, 3, 1.0, rng());
    if (variant == 2) f = std::make_unique<OneHiddenLayerFeature>(2, 3, 1, 2.0);
    const FiniteMdp mdp = mdp_for(rng, *f, uniform(rng, 0.0, 0.95));
    const int m = uniform_int(rng, 1, 6);
    const ParticleCloud a = random_cloud(rng, m, f->param_dim());
    ParticleCloud b = random_cloud(rng, m, f->param_dim());
    if (trial % 2) b.particles = a.particles + 0.05 * b.particles;
    const double w1 = wasserstein(a, b, 1, WassersteinMethod::assignment);
    const double a1 = f->norms().a1;
    const TabularPolicy pa = policy_from_cloud(a, *f, mdp), pb = policy_from_cloud(b, *f, mdp);
    for (int s = 0; s < mdp.n_states; ++s) CHECK((pa.probs.row(s) - pb.probs.row(s)).cwiseAbs().sum() <= 2 * a1 * w1 + 1e-9);
    const Matrix da = occupancy_kernel(mdp, pa), db = occupancy_kernel(mdp, pb);
    const double lip = 2 * mdp.gamma / (1 - mdp.gamma) * a1;
    for (int s = 0; s < mdp.n_states; ++s) CHECK((da.row(s) - db.row(s)).cwiseAbs().sum() <= lip * w1 + 1e-9);
  }
}
