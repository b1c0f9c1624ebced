#include "mfpg/soft_dp.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mfpg {

namespace {

constexpr double kSolveResidualTol = 1e-9;

// Per-action regularized reward r - tau ln(pi/mu) averaged under pi.
Vector regularized_reward(const FiniteMdp& mdp, const TabularPolicy& pi, double tau) {
  Vector out = Vector::Zero(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    double acc = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double p = pi(s, a);
      if (p == 0.0) continue;
      double term = mdp.reward(s, a);
      if (tau > 0.0) term -= tau * (std::log(p) - std::log(mdp.mu(a)));
      acc += p * term;
    }
    out(s) = acc;
  }
  return out;
}

}  // namespace

Matrix state_action_values(const FiniteMdp& mdp, const Vector& v) {
  const Vector next = mdp.transition * v;
  Matrix q(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) q(s, a) = mdp.reward(s, a) + mdp.gamma * next(mdp.row(s, a));
  }
  return q;
}

ValueFunctions policy_evaluate(const FiniteMdp& mdp, const TabularPolicy& pi, double tau) {
  if (!(tau >= 0.0)) throw ValidationError("policy_evaluate: tau must be nonnegative");
  require_valid(pi, mdp);
  if (tau > 0.0 && !pi.strictly_positive()) {
    throw ValidationError("policy_evaluate: tau > 0 requires a strictly positive policy");
  }
  const Matrix kernel = policy_transition(mdp, pi);
  const Matrix system = Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * kernel;
  const Vector rhs = regularized_reward(mdp, pi, tau);
  ValueFunctions out;
  out.tau = tau;
  out.v = system.partialPivLu().solve(rhs);
  const double residual = (system * out.v - rhs).cwiseAbs().maxCoeff();
  if (!(residual <= kSolveResidualTol)) {
    throw NumericalError("policy_evaluate: linear solve residual too large", residual);
  }
  out.q = state_action_values(mdp, out.v);
  return out;
}

Vector soft_bellman(const FiniteMdp& mdp, const Vector& v, double tau) {
  const Matrix q = state_action_values(mdp, v);
  Vector out(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    const double top = q.row(s).maxCoeff();
    if (tau == 0.0) {
      out(s) = top;
      continue;
    }
    double acc = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) acc += mdp.mu(a) * std::exp((q(s, a) - top) / tau);
    out(s) = top + tau * std::log(acc);
  }
  return out;
}

double bellman_residual(const FiniteMdp& mdp, const Vector& v, double tau) {
  return (soft_bellman(mdp, v, tau) - v).cwiseAbs().maxCoeff();
}

SoftDpResult soft_value_iteration(const FiniteMdp& mdp, double tau, const SoftDpOptions& opts) {
  if (!(tau >= 0.0)) throw ValidationError("soft_value_iteration: tau must be nonnegative");
  if (!(opts.tol > 0.0)) throw ValidationError("soft_value_iteration: tol must be positive");
  if (opts.max_iter < 1) throw ValidationError("soft_value_iteration: max_iter must be positive");
  require_valid(mdp);

  Vector v = Vector::Zero(mdp.n_states);
  double change = std::numeric_limits<double>::infinity();
  long iter = 0;
  while (iter < opts.max_iter) {
    Vector next = soft_bellman(mdp, v, tau);
    change = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    ++iter;
    if (change < opts.tol) break;
  }
  if (!(change < opts.tol)) {
    throw NumericalError("soft_value_iteration: max_iter reached, last change " + std::to_string(change), change);
  }

  SoftDpResult out;
  out.iterations = iter;
  out.last_change = change;
  out.values.tau = tau;
  out.values.v = v;
  out.values.q = state_action_values(mdp, v);
  Matrix probs = Matrix::Zero(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    if (tau == 0.0) {
      int best = 0;
      for (int a = 1; a < mdp.n_actions; ++a) {
        if (out.values.q(s, a) > out.values.q(s, best)) best = a;
      }
      probs(s, best) = 1.0;
      continue;
    }
    // Normalize explicitly; exp((Q - V)/tau) mu sums to 1 only up to tol.
    const double top = out.values.q.row(s).maxCoeff();
    double total = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      probs(s, a) = mdp.mu(a) * std::exp((out.values.q(s, a) - top) / tau);
      total += probs(s, a);
    }
    probs.row(s) /= total;
  }
  out.policy.probs = std::move(probs);
  return out;
}

Vector policy_kl(const TabularPolicy& pi, const FiniteMdp& mdp) {
  Vector out = Vector::Zero(pi.n_states());
  for (int s = 0; s < pi.n_states(); ++s) {
    for (int a = 0; a < pi.n_actions(); ++a) {
      const double p = pi(s, a);
      if (p > 0.0) out(s) += p * (std::log(p) - std::log(mdp.mu(a)));
    }
  }
  return out;
}

double kl_decomposition_check(const FiniteMdp& mdp, const TabularPolicy& pi, double tau) {
  if (!pi.strictly_positive()) throw ValidationError("kl_decomposition_check: policy must be strictly positive");
  const ValueFunctions soft = policy_evaluate(mdp, pi, tau);
  const ValueFunctions hard = policy_evaluate(mdp, pi, 0.0);
  if (tau == 0.0) return (soft.v - hard.v).cwiseAbs().maxCoeff();
  const Matrix kernel = occupancy_kernel(mdp, pi);
  const Vector correction = (tau / (1.0 - mdp.gamma)) * (kernel * policy_kl(pi, mdp));
  return (soft.v - hard.v + correction).cwiseAbs().maxCoeff();
}

}  // namespace mfpg
