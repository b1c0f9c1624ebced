#include "doctest.h"
#include "generators.hpp"
#include "mfpg/soft_dp.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace mfpg;
using namespace testsupport;

TEST_CASE("policy_evaluate: one state, uniform policy, tau = 1") {
  const FiniteMdp mdp = one_state_mdp({0.0, 1.0}, {1.0, 1.0});
  const ValueFunctions vf = policy_evaluate(mdp, uniform_policy(mdp), 1.0);
  CHECK(vf.v(0) == doctest::Approx(0.5 + std::numbers::ln2).epsilon(1e-14));
  CHECK(vf.v(0) == doctest::Approx(1.1931472).epsilon(1e-7));
}

TEST_CASE("policy_evaluate: deterministic chain with unit reward, gamma = 0.5") {
  FiniteMdp mdp;
  mdp.n_states = 3;
  mdp.n_actions = 1;
  mdp.gamma = 0.5;
  mdp.transition = Matrix::Zero(3, 3);
  mdp.transition(0, 1) = 1.0;
  mdp.transition(1, 2) = 1.0;
  mdp.transition(2, 0) = 1.0;
  mdp.reward = Matrix::Ones(3, 1);
  mdp.mu = Vector::Ones(1);
  mdp.rho = Vector::Constant(3, 1.0 / 3);
  const ValueFunctions vf = policy_evaluate(mdp, uniform_policy(mdp), 0.0);
  for (int s = 0; s < 3; ++s) CHECK(vf.v(s) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("policy_evaluate: matches Monte Carlo rollouts within 3 standard errors") {
  Rng rng(101);
  const FiniteMdp mdp = random_mdp(rng, {5, 3, 0.9});
  const TabularPolicy pi = random_policy(rng, mdp);
  const double tau = 0.1;
  const ValueFunctions vf = policy_evaluate(mdp, pi, tau);
  Rng sim(202);
  for (int s = 0; s < 5; ++s) {
    const MonteCarloEstimate est = rollout_value(mdp, pi, tau, s, 100000, 200, sim);
    CHECK(std::abs(est.mean - vf.v(s)) <= 3.0 * est.std_error);
  }
}

TEST_CASE("policy_evaluate: Q relation and Bellman residual") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteMdp mdp = random_mdp(rng, 0.9);
    const TabularPolicy pi = random_policy(rng, mdp);
    const double tau = uniform(rng, 0.0, 1.0);
    const ValueFunctions vf = policy_evaluate(mdp, pi, tau);
    CHECK((vf.q - q_from_v(mdp, vf.v)).cwiseAbs().maxCoeff() < 1e-10);
    for (int s = 0; s < mdp.n_states; ++s) {
      double rhs = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a)
        rhs += pi.probs(s, a) * (vf.q(s, a) - tau * std::log(pi.probs(s, a) / mdp.mu(a)));
      CHECK(std::abs(rhs - vf.v(s)) < 1e-10);
    }
    CHECK((vf.v - evaluate_by_qr(mdp, pi, tau)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("policy_evaluate: zero entry with tau > 0 rejected, allowed at tau = 0") {
  const FiniteMdp mdp = one_state_mdp({0.0, 1.0}, {1.0, 1.0});
  const TabularPolicy pi = deterministic_policy(mdp, {1});
  CHECK_THROWS_AS(policy_evaluate(mdp, pi, 0.5), ValidationError);
  CHECK(policy_evaluate(mdp, pi, 0.0).v(0) == doctest::Approx(1.0));
}

TEST_CASE("soft_value_iteration: single action gives V* = c + tau ln mu(A)") {
  const double c = 0.7;
  for (double tau : {0.1, 1.0, 3.0}) {
    const FiniteMdp unit = one_state_mdp({c}, {1.0});
    CHECK(soft_value_iteration(unit, tau).values.v(0) == doctest::Approx(c).epsilon(1e-14));
    const FiniteMdp doubled = one_state_mdp({c}, {2.0});
    CHECK(soft_value_iteration(doubled, tau).values.v(0) ==
          doctest::Approx(c + tau * std::numbers::ln2).epsilon(1e-14));
  }
}

TEST_CASE("soft_value_iteration: matches an in-place Bellman iteration") {
  Rng rng(41);
  const FiniteMdp mdp = random_mdp(rng, {3, 2, 0.9});
  for (double tau : {0.05, 0.0, 1.0}) {
    const SoftDpResult res = soft_value_iteration(mdp, tau);
    const Vector oracle = soft_value_gauss_seidel(mdp, tau);
    CHECK((res.values.v - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("soft_value_iteration: optimal policy form and residual bound") {
  Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const FiniteMdp mdp = random_mdp(rng, 0.9);
    const double tau = uniform(rng, 0.01, 1.0);
    SoftDpOptions opts;
    opts.tol = 1e-11;
    const SoftDpResult res = soft_value_iteration(mdp, tau, opts);
    CHECK(bellman_residual(mdp, res.values.v, tau) <= opts.tol * (1 + mdp.gamma) / (1 - mdp.gamma));
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double expected = std::exp((res.values.q(s, a) - res.values.v(s)) / tau) * mdp.mu(a);
        CHECK(res.policy.probs(s, a) == doctest::Approx(expected).epsilon(1e-9));
      }
  }
}

TEST_CASE("soft_value_iteration: hard max breaks ties at the lowest index") {
  const FiniteMdp mdp = one_state_mdp({1.0, 2.0, 2.0}, {1.0, 1.0, 1.0}, 0.5);
  const SoftDpResult res = soft_value_iteration(mdp, 0.0);
  CHECK(res.policy.probs(0, 1) == 1.0);
  CHECK(res.policy.probs(0, 2) == 0.0);
  CHECK(res.values.v(0) == doctest::Approx(4.0).epsilon(1e-11));
}

TEST_CASE("soft_value_iteration: iteration budget error carries the last change") {
  Rng rng(47);
  const FiniteMdp mdp = random_mdp(rng, {4, 2, 0.99});
  SoftDpOptions opts;
  opts.max_iter = 5;
  try {
    soft_value_iteration(mdp, 0.5, opts);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.residual() > opts.tol);
  }
  opts.tol = 0.0;
  CHECK_THROWS_AS(soft_value_iteration(mdp, 0.5, opts), ValidationError);
}

TEST_CASE("soft_value_iteration: extreme tau does not overflow") {
  const FiniteMdp mdp = one_state_mdp({1000.0, -1000.0}, {1e-3, 1e3}, 0.5);
  const SoftDpResult res = soft_value_iteration(mdp, 1e-3);
  CHECK(std::isfinite(res.values.v(0)));
  CHECK(res.policy.probs.allFinite());
}

TEST_CASE("soft optimality dominates random strictly positive policies") {
  Rng rng(53);
  const FiniteMdp mdp = random_mdp(rng, {5, 3, 0.9});
  for (double tau : {0.0, 0.05, 1.0}) {
    const SoftDpResult res = soft_value_iteration(mdp, tau);
    const Vector star = policy_evaluate(mdp, res.policy, tau).v;
    for (int k = 0; k < 100; ++k) {
      const Vector v = policy_evaluate(mdp, random_policy(rng, mdp), tau).v;
      CHECK((star - v).minCoeff() >= -1e-9);
    }
  }
}

TEST_CASE("value iteration iterates contract by gamma") {
  Rng rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    const FiniteMdp mdp = random_mdp(rng, uniform(rng, 0.1, 0.95));
    const double tau = trial % 3 == 0 ? 0.0 : uniform(rng, 0.01, 2.0);
    Vector v = Vector::Zero(mdp.n_states);
    Vector next = soft_bellman(mdp, v, tau);
    double prev = (next - v).cwiseAbs().maxCoeff();
    for (int it = 0; it < 40 && prev > 1e-10; ++it) {
      v = next;
      next = soft_bellman(mdp, v, tau);
      const double change = (next - v).cwiseAbs().maxCoeff();
      CHECK(change <= (mdp.gamma + 1e-12) * prev + 1e-15);
      prev = change;
    }
  }
}

TEST_CASE("linear-solve V equals the occupancy-weighted form") {
  Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const FiniteMdp mdp = random_mdp(rng, 0.9);
    const TabularPolicy pi = random_policy(rng, mdp);
    const double tau = uniform(rng, 0.0, 1.0);
    const Vector v = policy_evaluate(mdp, pi, tau).v;
    Vector r_pi = Vector::Zero(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) r_pi(s) += pi.probs(s, a) * entropy_reward(mdp, pi, tau, s, a);
    for (int s = 0; s < mdp.n_states; ++s) {
      const Vector d = occupancy_series(mdp, pi, Vector::Unit(mdp.n_states, s), 600);
      CHECK(std::abs(v(s) - d.dot(r_pi) / (1 - mdp.gamma)) < 1e-9);
    }
  }
}

TEST_CASE("kl_decomposition_check") {
  Rng rng(67);
  const FiniteMdp mdp = random_mdp(rng, {4, 3, 0.8});
  const TabularPolicy pi = random_policy(rng, mdp);
  CHECK(kl_decomposition_check(mdp, pi, 0.0) == 0.0);
  CHECK(kl_decomposition_check(mdp, reference_policy(mdp), 0.7) < 1e-10);
  CHECK(kl_decomposition_check(mdp, pi, 0.3) < 1e-9);
  // KL of a reference-proportional policy is -ln mu(A)
  CHECK((policy_kl(reference_policy(mdp), mdp).array() + std::log(mdp.mu_total())).abs().maxCoeff() < 1e-14);
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteMdp m2 = random_mdp(rng, uniform(rng, 0.0, 0.95));
    CHECK(kl_decomposition_check(m2, random_policy(rng, m2), uniform(rng, 0.0, 2.0)) < 1e-9);
  }
}
