#pragma once

#include "mfpg/cloud.hpp"
#include "mfpg/estimators.hpp"
#include "mfpg/features.hpp"
#include "mfpg/flow.hpp"
#include "mfpg/mdp.hpp"
#include "mfpg/prior.hpp"
#include "mfpg/wasserstein.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mfpg {

/// J^{tau,0}(nu) = V^{pi_nu}_tau(rho).
double objective(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud, double tau,
                 const StateDistribution& rho);

/// J^{tau,0} - (sigma^2/2) KL estimate; the KL term is skipped when sigma = 0.
double j_tau_sigma(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud, double tau,
                   double sigma, const GaussianPrior& prior, const StateDistribution& rho,
                   KlMethod method = KlMethod::gaussian_proxy);

// ---------------------------------------------------------------------------
// Constants

enum class ConstantsMode { generic, example42 };

struct ConstantsInput {
  double gamma = 0.0;
  double r_inf = 0.0;
  double tau = 0.0;
  double mu_total = 1.0;
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double kappa = 0.0;
  double sigma = 0.0;
  double psi_inf = 1.0;  // example42 mode only
};

struct ConstantsReport {
  ConstantsMode mode = ConstantsMode::generic;
  ConstantsInput input;
  double c1 = 0.0;
  double c2 = 0.0;
  double l = 0.0;
  double l_occupancy = 0.0;  // I1
  double l_values = 0.0;     // I2
  double l_policy = 0.0;     // I3 + I4
  double d = 0.0;
  double beta = 0.0;
  bool beta_positive() const { return beta > 0.0; }
};

ConstantsReport theoretical_constants(const ConstantsInput& input, ConstantsMode mode = ConstantsMode::generic);

/// Inputs gathered from a model, a feature map, and flow parameters.
ConstantsInput constants_input(const FiniteMdp& mdp, const FeatureMap& features, double tau, double kappa,
                               double sigma);

std::string to_string(ConstantsMode mode);
ConstantsMode parse_constants_mode(const std::string& name);

// ---------------------------------------------------------------------------
// Probes

struct LipschitzOptions {
  int n_pairs = 100;
  std::uint64_t seed = 0;
  int m = 4;
  double spread = 1.0;
};

struct LipschitzReport {
  double max_ratio = 0.0;
  double bound = 0.0;
  int pairs_evaluated = 0;
  int pairs_skipped = 0;
  bool passed = true;
};

/// max over random pairs and evaluation points of |G(nu',theta) - G(nu,theta)| / W1(nu',nu).
LipschitzReport lipschitz_probe(const FiniteMdp& mdp, const FeatureMap& features, double tau,
                                const StateDistribution& rho, const LipschitzOptions& options);

/// Ratio for a single pair, evaluated at the particles of both clouds; nullopt when W1 = 0.
std::optional<double> lipschitz_ratio(const FiniteMdp& mdp, const FeatureMap& features, double tau,
                                      const StateDistribution& rho, const ParticleCloud& a, const ParticleCloud& b);

/// Random cloud with i.i.d. N(0, spread^2) coordinates.
ParticleCloud random_cloud(int m, int d, double spread, std::uint64_t seed, std::uint64_t index);

struct DerivativeReport {
  double max_abs_error = 0.0;
  double scale = 0.0;  // max |analytic|
  double rel_error = 0.0;
};

/// w_i G_i[k] against Richardson-extrapolated central differences of J^{tau,0}
/// in theta_i[k].
DerivativeReport check_flow_gradient(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud,
                                     double tau, const StateDistribution& rho, double h = 1e-3);

/// delta pi / delta nu at theta against the mixture perturbation
/// (pi_{nu + eps (delta_theta - nu)} - pi_nu)/eps, extrapolated in eps.
/// The mixture derivative is the centred kernel, so the analytic side is
/// compared after subtracting its nu-average.
DerivativeReport check_policy_derivative(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud,
                                         std::span<const double> theta, double eps = 1e-3);

// ---------------------------------------------------------------------------
// Rates and stationarity

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least squares of ln(values) on times over [t_lo, t_hi].
RateFit rate_fit(const std::vector<double>& times, const std::vector<double>& values, double t_lo, double t_hi);

/// Same, with W2 from each snapshot to the reference cloud.
RateFit rate_fit(const Trajectory& trajectory, const ParticleCloud& reference, double t_lo, double t_hi,
                 const WassersteinOptions& options = {});

struct StationarityReport {
  double residual = 0.0;  // weighted std of h_i
  double mean = 0.0;      // weighted mean of h_i
  std::string density;    // "gaussian", "knn" or "none"
};

/// h_i = first_variation_i - (sigma^2/2) U(theta_i) - (sigma^2/2) ln nu_hat(theta_i).
StationarityReport stationarity_residual(const ParticleCloud& cloud, const Vector& first_variation, double sigma,
                                         const GaussianPrior& prior);

StationarityReport stationarity_residual(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud,
                                         double tau, double sigma, const GaussianPrior& prior,
                                         const StateDistribution& rho);

// ---------------------------------------------------------------------------
// Sensitivity

struct SensitivityOptions {
  double hat_tau = 0.0;
  std::optional<double> young_ell;  // report the W2 flow bound for this ell
  WassersteinMethod w2_method = WassersteinMethod::automatic;
};

struct SensitivityRecord {
  long step = 0;
  double time = 0.0;
  double w2 = 0.0;
  double value_gap = 0.0;
  double bound = 0.0;  // C1(hat_tau) W2 + 1e-9
  bool ok = true;
  std::optional<double> w2_sq_bound;
  std::optional<bool> w2_within_bound;
};

struct SensitivityReport {
  double c1 = 0.0;
  std::optional<double> beta_ell;
  std::vector<SensitivityRecord> records;
  int violations = 0;
  bool passed() const { return violations == 0; }
};

/// Runs two flows with shared noise and checks |V_a - V_b| <= C1 W2 at every record.
SensitivityReport sensitivity_check(const FiniteMdp& mdp, const FeatureMap& features, const FlowConfig& a,
                                    const FlowConfig& b, const ParticleCloud& init_a, const ParticleCloud& init_b,
                                    const SensitivityOptions& options);

}  // namespace mfpg
