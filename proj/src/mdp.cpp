#include "mfpg/mdp.hpp"

#include <cmath>
#include <sstream>

namespace mfpg {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kSolveResidualTol = 1e-9;

std::string index_string(std::initializer_list<long> idx) {
  std::ostringstream out;
  out << '(';
  bool first = true;
  for (long i : idx) {
    if (!first) out << ',';
    out << i;
    first = false;
  }
  out << ')';
  return out.str();
}

std::string join(const std::vector<Violation>& violations) {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << violations[i].message();
  }
  return out.str();
}

}  // namespace

std::vector<Violation> validate(const FiniteMdp& mdp) {
  std::vector<Violation> out;
  if (mdp.n_states <= 0) out.push_back({"n_states must be positive", "n_states"});
  if (mdp.n_actions <= 0) out.push_back({"n_actions must be positive", "n_actions"});
  if (!out.empty()) return out;

  const long rows = static_cast<long>(mdp.n_states) * mdp.n_actions;
  if (mdp.transition.rows() != rows || mdp.transition.cols() != mdp.n_states) {
    out.push_back({"transition shape must be [n_states][n_actions][n_states]", "transition"});
  } else {
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        const auto row = mdp.transition.row(mdp.row(s, a));
        if (!row.allFinite() || (row.array() < 0.0).any()) {
          out.push_back({"transition entries must be nonnegative", "transition" + index_string({s, a})});
        } else if (std::abs(row.sum() - 1.0) > kStochasticTol) {
          out.push_back({"transition row must sum to 1", "transition" + index_string({s, a})});
        }
      }
    }
  }

  if (mdp.reward.rows() != mdp.n_states || mdp.reward.cols() != mdp.n_actions) {
    out.push_back({"reward shape must be [n_states][n_actions]", "reward"});
  } else if (!mdp.reward.allFinite()) {
    out.push_back({"reward must be finite (bounded)", "reward"});
  }

  if (!(mdp.gamma >= 0.0 && mdp.gamma < 1.0)) {
    out.push_back({"gamma must lie in [0,1)", "gamma"});
  }

  if (mdp.mu.size() != mdp.n_actions) {
    out.push_back({"mu_weights length must equal n_actions", "mu_weights"});
  } else {
    for (int a = 0; a < mdp.n_actions; ++a) {
      if (!(mdp.mu(a) > 0.0) || !std::isfinite(mdp.mu(a))) {
        out.push_back({"mu_weights must be strictly positive and finite", "mu_weights" + index_string({a})});
      }
    }
  }

  if (mdp.rho.size() != mdp.n_states) {
    out.push_back({"rho length must equal n_states", "rho"});
  } else {
    for (int s = 0; s < mdp.n_states; ++s) {
      if (!(mdp.rho(s) >= 0.0)) out.push_back({"rho entries must be nonnegative", "rho" + index_string({s})});
    }
    if (std::abs(mdp.rho.sum() - 1.0) > kStochasticTol) out.push_back({"rho must sum to 1", "rho"});
  }
  return out;
}

std::vector<Violation> validate(const TabularPolicy& pi, const FiniteMdp& mdp) {
  std::vector<Violation> out;
  if (pi.n_states() != mdp.n_states || pi.n_actions() != mdp.n_actions) {
    out.push_back({"policy shape must be [n_states][n_actions]", "policy"});
    return out;
  }
  for (int s = 0; s < pi.n_states(); ++s) {
    const auto row = pi.probs.row(s);
    if (!row.allFinite() || (row.array() < 0.0).any()) {
      out.push_back({"policy entries must be nonnegative", "policy" + index_string({s})});
    } else if (std::abs(row.sum() - 1.0) > kStochasticTol) {
      out.push_back({"policy row must sum to 1", "policy" + index_string({s})});
    }
  }
  return out;
}

bool is_distribution(const StateDistribution& d, double tol) {
  return d.size() > 0 && d.allFinite() && (d.array() >= 0.0).all() && std::abs(d.sum() - 1.0) <= tol;
}

void require_valid(const FiniteMdp& mdp) {
  const auto violations = validate(mdp);
  if (!violations.empty()) throw ValidationError("invalid MDP: " + join(violations));
}

void require_valid(const TabularPolicy& pi, const FiniteMdp& mdp) {
  const auto violations = validate(pi, mdp);
  if (!violations.empty()) throw ValidationError("invalid policy: " + join(violations));
}

TabularPolicy uniform_policy(const FiniteMdp& mdp) {
  return {Matrix::Constant(mdp.n_states, mdp.n_actions, 1.0 / mdp.n_actions)};
}

TabularPolicy reference_policy(const FiniteMdp& mdp) {
  const Vector normalized = mdp.mu / mdp.mu_total();
  Matrix probs(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) probs.row(s) = normalized.transpose();
  return {probs};
}

Matrix policy_transition(const FiniteMdp& mdp, const TabularPolicy& pi) {
  if (pi.n_states() != mdp.n_states || pi.n_actions() != mdp.n_actions) {
    throw ValidationError("policy_transition: policy dimensions do not match the MDP");
  }
  Matrix kernel = Matrix::Zero(mdp.n_states, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = pi(s, a);
      if (w != 0.0) kernel.row(s) += w * mdp.transition.row(mdp.row(s, a));
    }
  }
  return kernel;
}

StateDistribution occupancy(const FiniteMdp& mdp, const TabularPolicy& pi, const StateDistribution& start) {
  if (start.size() != mdp.n_states) throw ValidationError("occupancy: start distribution has wrong length");
  const Matrix kernel = policy_transition(mdp, pi);
  const Matrix system = Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * kernel.transpose();
  const Vector rhs = (1.0 - mdp.gamma) * start;
  const Vector d = system.partialPivLu().solve(rhs);
  const double residual = (system * d - rhs).cwiseAbs().maxCoeff();
  if (!(residual <= kSolveResidualTol)) {
    throw NumericalError("occupancy: linear solve residual too large", residual);
  }
  return d;
}

Matrix occupancy_kernel(const FiniteMdp& mdp, const TabularPolicy& pi) {
  const Matrix kernel = policy_transition(mdp, pi);
  const Matrix system = Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * kernel;
  const Matrix rhs = (1.0 - mdp.gamma) * Matrix::Identity(mdp.n_states, mdp.n_states);
  // (I - gamma P)^{-1} (1-gamma); row s is d(.|s).
  const Matrix d = system.partialPivLu().solve(rhs);
  const double residual = (system * d - rhs).cwiseAbs().maxCoeff();
  if (!(residual <= kSolveResidualTol)) {
    throw NumericalError("occupancy_kernel: linear solve residual too large", residual);
  }
  return d;
}

Matrix log_density(const TabularPolicy& pi, const FiniteMdp& mdp) {
  if (pi.n_states() != mdp.n_states || pi.n_actions() != mdp.n_actions) {
    throw ValidationError("log_density: policy dimensions do not match the MDP");
  }
  if (!pi.strictly_positive()) throw ValidationError("log_density: policy has a zero entry");
  Matrix out(pi.n_states(), pi.n_actions());
  for (int s = 0; s < pi.n_states(); ++s) {
    for (int a = 0; a < pi.n_actions(); ++a) out(s, a) = std::log(pi(s, a)) - std::log(mdp.mu(a));
  }
  return out;
}

}  // namespace mfpg
