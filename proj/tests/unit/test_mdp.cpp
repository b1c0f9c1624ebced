#include "doctest.h"
#include "generators.hpp"
#include "mfpg/io.hpp"
#include "mfpg/mdp.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>

using namespace mfpg;
using namespace testsupport;

namespace {

FiniteMdp two_state() {
  Rng rng(11);
  return random_mdp(rng, {2, 2, 0.9}, 0.0);
}

FiniteMdp absorbing_single_state() { return one_state_mdp({1.0, 0.0}, {1.0, 1.0}, 0.9); }

}  // namespace

TEST_CASE("validate: well-formed MDP has no violations") { CHECK(validate(two_state()).empty()); }

TEST_CASE("validate: transition row summing to 0.9 names (s,a)") {
  FiniteMdp mdp = two_state();
  mdp.transition.row(mdp.row(1, 0)) *= 0.9;
  const auto v = validate(mdp);
  REQUIRE(v.size() == 1);
  CHECK(v[0].location == "transition(1,0)");
  CHECK(v[0].invariant.find("sum to 1") != std::string::npos);
}

TEST_CASE("validate: zero mu weight reported as positivity violation") {
  FiniteMdp mdp = two_state();
  mdp.mu(1) = 0.0;
  const auto v = validate(mdp);
  REQUIRE(v.size() == 1);
  CHECK(v[0].location == "mu_weights(1)");
  CHECK(v[0].invariant.find("strictly positive") != std::string::npos);
}

TEST_CASE("validate: gamma, rho and shape violations") {
  FiniteMdp mdp = two_state();
  mdp.gamma = 1.0;
  mdp.rho(0) += 0.5;
  const auto v = validate(mdp);
  CHECK(v.size() == 2);
  mdp = two_state();
  mdp.reward.resize(3, 2);
  CHECK(validate(mdp).size() == 1);
  CHECK_THROWS_AS(require_valid(mdp), ValidationError);
}

TEST_CASE("policy_transition: deterministic policy selects the chosen rows") {
  Rng rng(3);
  const FiniteMdp mdp = random_mdp(rng, {4, 3, 0.5});
  const TabularPolicy pi = deterministic_policy(mdp, {0, 2, 1, 0});
  const Matrix k = policy_transition(mdp, pi);
  const int chosen[] = {0, 2, 1, 0};
  for (int s = 0; s < 4; ++s) CHECK((k.row(s) - mdp.transition.row(mdp.row(s, chosen[s]))).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("policy_transition: one-state MDP gives [[1]]") {
  const FiniteMdp mdp = one_state_mdp({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0});
  const Matrix k = policy_transition(mdp, uniform_policy(mdp));
  REQUIRE(k.rows() == 1);
  CHECK(k(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("policy_transition: uniform policy equals triple-loop action average") {
  Rng rng(5);
  const FiniteMdp mdp = random_mdp(rng, {4, 3, 0.9});
  const Matrix k = policy_transition(mdp, uniform_policy(mdp));
  const Matrix oracle = kernel_by_loops(mdp, uniform_policy(mdp));
  CHECK((k - oracle).cwiseAbs().maxCoeff() < 1e-15);
  for (int s = 0; s < 4; ++s) {
    Vector avg = Vector::Zero(4);
    for (int a = 0; a < 3; ++a) avg += mdp.transition.row(mdp.row(s, a)).transpose() / 3.0;
    CHECK((k.row(s).transpose() - avg).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("policy_transition: rows stochastic and powers compose") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteMdp mdp = random_mdp(rng, 0.7);
    const TabularPolicy pi = random_policy(rng, mdp, false);
    const Matrix k = policy_transition(mdp, pi);
    CHECK((k.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    // n-step distribution by repeated vector-kernel products vs the matrix power
    Matrix power = Matrix::Identity(mdp.n_states, mdp.n_states);
    for (int n = 1; n <= 5; ++n) {
      power = power * k;
      Vector dist = mdp.rho;
      for (int j = 0; j < n; ++j) dist = (dist.transpose() * kernel_by_loops(mdp, pi)).transpose();
      CHECK((dist - (mdp.rho.transpose() * power).transpose()).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("policy_transition: dimension mismatch rejected") {
  const FiniteMdp mdp = two_state();
  TabularPolicy pi;
  pi.probs = Matrix::Constant(3, 2, 0.5);
  CHECK_THROWS_AS(policy_transition(mdp, pi), ValidationError);
}

TEST_CASE("occupancy: gamma = 0 returns the start distribution") {
  Rng rng(2);
  const FiniteMdp mdp = random_mdp(rng, {5, 2, 0.0});
  const Vector d = occupancy(mdp, random_policy(rng, mdp), mdp.rho);
  CHECK((d - mdp.rho).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("occupancy: absorbing state gives its point mass") {
  const FiniteMdp mdp = absorbing_single_state();
  const Vector d = occupancy(mdp, uniform_policy(mdp), mdp.rho);
  CHECK(d(0) == doctest::Approx(1.0).epsilon(1e-15));

  // Two states, state 0 absorbing under every action.
  FiniteMdp two = two_state();
  two.transition.row(two.row(0, 0)) << 1.0, 0.0;
  two.transition.row(two.row(0, 1)) << 1.0, 0.0;
  Vector start(2);
  start << 1.0, 0.0;
  const Vector d2 = occupancy(two, uniform_policy(two), start);
  CHECK(d2(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(d2(1)) < 1e-14);
}

TEST_CASE("occupancy: linear solve matches the 1000-term series") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const FiniteMdp mdp = random_mdp(rng, {5, 3, 0.9});
    const TabularPolicy pi = random_policy(rng, mdp);
    const Vector d = occupancy(mdp, pi, mdp.rho);
    const Vector series = occupancy_series(mdp, pi, mdp.rho, 1000);
    CHECK((d - series).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("occupancy: fuzz over distributions and the fixed-point identity") {
  Rng rng(23);
  const double gammas[] = {0.0, 0.5, 0.9, 0.99};
  for (int trial = 0; trial < 100; ++trial) {
    const FiniteMdp mdp = random_mdp(rng, gammas[trial % 4]);
    const TabularPolicy pi = random_policy(rng, mdp, trial % 2 == 0);
    const Vector start = random_distribution(rng, mdp.n_states, 0.3);
    const Vector d = occupancy(mdp, pi, start);
    CHECK(std::abs(d.sum() - 1.0) < 1e-10);
    CHECK(d.minCoeff() >= 0.0);
    const Matrix k = kernel_by_loops(mdp, pi);
    const Vector rhs = (1.0 - mdp.gamma) * start + mdp.gamma * k.transpose() * d;
    CHECK((d - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("occupancy_kernel rows are occupancies from point masses") {
  Rng rng(4);
  const FiniteMdp mdp = random_mdp(rng, {4, 2, 0.8});
  const TabularPolicy pi = random_policy(rng, mdp);
  const Matrix kernel = occupancy_kernel(mdp, pi);
  for (int s = 0; s < 4; ++s) {
    const Vector series = occupancy_series(mdp, pi, Vector::Unit(4, s), 2000);
    CHECK((kernel.row(s).transpose() - series).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("log_density: reference-proportional policy is -ln mu(A)") {
  Rng rng(9);
  const FiniteMdp mdp = random_mdp(rng, {3, 4, 0.5});
  const Matrix l = log_density(reference_policy(mdp), mdp);
  CHECK((l.array() + std::log(mdp.mu_total())).abs().maxCoeff() < 1e-14);
}

TEST_CASE("log_density: zero entry rejected") {
  const FiniteMdp mdp = two_state();
  CHECK_THROWS_AS(log_density(deterministic_policy(mdp, {0, 1}), mdp), ValidationError);
}

TEST_CASE("MDP JSON: round trip and strict loading") {
  Rng rng(31);
  const FiniteMdp mdp = random_mdp(rng, {3, 2, 0.7});
  const FiniteMdp back = mdp_from_json(to_json(mdp));
  CHECK(back.n_states == 3);
  CHECK((back.transition - mdp.transition).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.reward - mdp.reward).cwiseAbs().maxCoeff() == 0.0);

  Json bad = to_json(mdp);
  bad["extra"] = 1;
  CHECK_THROWS_AS(mdp_from_json(bad), ValidationError);
  bad = to_json(mdp);
  bad["mu_weights"][0] = -1.0;
  CHECK_THROWS_WITH_AS(mdp_from_json(bad), doctest::Contains("mu_weights"), ValidationError);

  const auto missing = std::filesystem::temp_directory_path() / "mfpg_missing_model.json";
  std::filesystem::remove(missing);
  CHECK_THROWS_WITH_AS(load_mdp(missing), doctest::Contains(missing.string().c_str()), ValidationError);

  const auto broken = std::filesystem::temp_directory_path() / "mfpg_broken_model.json";
  std::ofstream(broken) << "{ not json";
  CHECK_THROWS_WITH_AS(load_mdp(broken), doctest::Contains("malformed"), ValidationError);
  std::filesystem::remove(broken);
}
