#include "mfpg/analysis.hpp"

#include "mfpg/gradient.hpp"
#include "mfpg/policy.hpp"
#include "mfpg/rng.hpp"
#include "mfpg/soft_dp.hpp"

#include <algorithm>
#include <cmath>

namespace mfpg {

double objective(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud, double tau,
                 const StateDistribution& rho) {
  if (!(tau >= 0.0)) throw ValidationError("objective: tau must be nonnegative");
  const TabularPolicy pi = policy_from_cloud(cloud, features, mdp);
  return rho.dot(policy_evaluate(mdp, pi, tau).v);
}

double j_tau_sigma(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud, double tau,
                   double sigma, const GaussianPrior& prior, const StateDistribution& rho, KlMethod method) {
  const double base = objective(mdp, features, cloud, tau, rho);
  if (sigma == 0.0) return base;
  return base - 0.5 * sigma * sigma * kl_estimate(cloud, prior, method);
}

// ---------------------------------------------------------------------------

ConstantsReport theoretical_constants(const ConstantsInput& in, ConstantsMode mode) {
  if (!(in.gamma >= 0.0 && in.gamma < 1.0)) throw ValidationError("constants: gamma must lie in [0,1)");
  for (double x : {in.r_inf, in.tau, in.a0, in.a1, in.a2, in.kappa, in.sigma, in.psi_inf}) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("constants: inputs must be finite and >= 0");
  }
  if (!(in.mu_total > 0.0)) throw ValidationError("constants: mu_total must be > 0");

  ConstantsReport out;
  out.mode = mode;
  out.input = in;
  const double g = in.gamma;
  const double log_mu = std::abs(std::log(in.mu_total));
  const double density = 2.0 * in.a0 + log_mu;  // sup |ln d pi/d mu|
  const double qbar = in.r_inf + in.tau * density;
  const double one = 1.0 - g;

  if (mode == ConstantsMode::generic) {
    out.c1 = 2.0 / (one * one) * qbar * in.a1;
    out.c2 = 2.0 / (one * one) * qbar * in.a2;
    const double a1sq = in.a1 * in.a1;
    out.l_occupancy = 4.0 * g / (one * one * one) * (in.r_inf + in.tau * (2.0 * in.a1 + log_mu)) * a1sq;
    out.l_values = 4.0 / one * (g / (one * one) * qbar + in.tau) * a1sq;
    out.l_policy = 4.0 / (one * one) * qbar * a1sq;
    out.l = out.l_occupancy + out.l_values + out.l_policy;
  } else {
    const double p = in.psi_inf;
    out.c1 = 2.0 * p * (in.r_inf + in.tau * p);
    out.c2 = out.c1;
    out.l = (6.0 * in.r_inf + 2.0 * in.tau) * p * p + 6.0 * in.tau * p * p * p;
  }
  out.d = 2.0 / (one * one) * density * in.a1;
  out.beta = 0.5 * in.sigma * in.sigma * in.kappa - out.c2 - out.l;
  return out;
}

ConstantsInput constants_input(const FiniteMdp& mdp, const FeatureMap& features, double tau, double kappa,
                               double sigma) {
  const FeatureNorms n = features.norms();
  ConstantsInput in;
  in.gamma = mdp.gamma;
  in.r_inf = mdp.reward_sup();
  in.tau = tau;
  in.mu_total = mdp.mu_total();
  in.a0 = n.a0;
  in.a1 = n.a1;
  in.a2 = n.a2;
  in.kappa = kappa;
  in.sigma = sigma;
  return in;
}

std::string to_string(ConstantsMode mode) { return mode == ConstantsMode::generic ? "generic" : "example42"; }

ConstantsMode parse_constants_mode(const std::string& name) {
  if (name == "generic") return ConstantsMode::generic;
  if (name == "example42") return ConstantsMode::example42;
  throw ValidationError("unknown constants mode '" + name + "'");
}

// ---------------------------------------------------------------------------

ParticleCloud random_cloud(int m, int d, double spread, std::uint64_t seed, std::uint64_t index) {
  const CounterRng rng(seed, Stream::probe);
  RowMatrix theta(m, d);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < d; ++k) theta(i, k) = spread * rng.normal(index, i, k);
  }
  return ParticleCloud::uniform(std::move(theta));
}

std::optional<double> lipschitz_ratio(const FiniteMdp& mdp, const FeatureMap& features, double tau,
                                      const StateDistribution& rho, const ParticleCloud& a, const ParticleCloud& b) {
  const double w1 = wasserstein(a, b, 1, WassersteinMethod::assignment);
  if (!(w1 > 0.0)) return std::nullopt;
  const MeanFieldState sa = evaluate_state(mdp, features, a, tau, rho);
  const MeanFieldState sb = evaluate_state(mdp, features, b, tau, rho);
  const int d = a.dim();
  std::vector<double> ga(d), gb(d);
  double worst = 0.0;
  for (const ParticleCloud* cloud : {&a, &b}) {
    for (int i = 0; i < cloud->size(); ++i) {
      first_variation_gradient(sa, features, cloud->particle(i), ga);
      first_variation_gradient(sb, features, cloud->particle(i), gb);
      double sq = 0.0;
      for (int k = 0; k < d; ++k) sq += (gb[k] - ga[k]) * (gb[k] - ga[k]);
      worst = std::max(worst, std::sqrt(sq));
    }
  }
  return worst / w1;
}

LipschitzReport lipschitz_probe(const FiniteMdp& mdp, const FeatureMap& features, double tau,
                                const StateDistribution& rho, const LipschitzOptions& options) {
  if (options.n_pairs < 1) throw ValidationError("lipschitz_probe: n_pairs must be >= 1");
  if (options.m < 1 || options.m > 512) throw ValidationError("lipschitz_probe: m must lie in [1, 512]");
  LipschitzReport out;
  out.bound = theoretical_constants(constants_input(mdp, features, tau, 0.0, 0.0)).l;
  const int d = features.param_dim();
  for (int j = 0; j < options.n_pairs; ++j) {
    const ParticleCloud a = random_cloud(options.m, d, options.spread, options.seed, 2 * j);
    ParticleCloud b = random_cloud(options.m, d, options.spread, options.seed, 2 * j + 1);
    if (j % 2 == 1) {
      // Nearby pair: small perturbation of a.
      b.particles = a.particles + 0.05 * b.particles;
    }
    const auto ratio = lipschitz_ratio(mdp, features, tau, rho, a, b);
    if (!ratio) {
      ++out.pairs_skipped;
      continue;
    }
    ++out.pairs_evaluated;
    out.max_ratio = std::max(out.max_ratio, *ratio);
  }
  out.passed = out.max_ratio <= out.bound + 1e-6;
  return out;
}

DerivativeReport check_flow_gradient(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud,
                                     double tau, const StateDistribution& rho, double h) {
  const RowMatrix g = flow_gradient(mdp, features, cloud, tau, rho);
  DerivativeReport out;
  ParticleCloud work = cloud;
  auto central = [&](int i, int k, double step) {
    const double x = cloud.particles(i, k);
    work.particles(i, k) = x + step;
    const double up = objective(mdp, features, work, tau, rho);
    work.particles(i, k) = x - step;
    const double down = objective(mdp, features, work, tau, rho);
    work.particles(i, k) = x;
    return (up - down) / (2.0 * step);
  };
  for (int i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < cloud.dim(); ++k) {
      const double coarse = central(i, k, h);
      const double fine = central(i, k, 0.5 * h);
      const double fd = (4.0 * fine - coarse) / 3.0;
      const double analytic = cloud.weights(i) * g(i, k);
      out.max_abs_error = std::max(out.max_abs_error, std::abs(fd - analytic));
      out.scale = std::max(out.scale, std::abs(analytic));
    }
  }
  out.rel_error = out.scale > 0.0 ? out.max_abs_error / out.scale : out.max_abs_error;
  return out;
}

DerivativeReport check_policy_derivative(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud,
                                         std::span<const double> theta, double eps) {
  require_compatible(features, mdp, cloud);
  const TabularPolicy base = policy_from_cloud(cloud, features, mdp);

  // Analytic kernel at theta, minus its nu-average.
  Matrix analytic(mdp.n_states, mdp.n_actions);
  Matrix average = Matrix::Zero(mdp.n_states, mdp.n_actions);
  for (int s = 0; s < mdp.n_states; ++s) {
    analytic.row(s) = policy_functional_derivative(cloud, features, mdp, theta, s).transpose();
    for (int i = 0; i < cloud.size(); ++i) {
      average.row(s) += cloud.weights(i) * policy_functional_derivative(cloud, features, mdp, cloud.particle(i), s).transpose();
    }
  }
  const Matrix centred = analytic - average;

  auto mixture_quotient = [&](double e) {
    ParticleCloud mixed;
    mixed.particles.resize(cloud.size() + 1, cloud.dim());
    mixed.particles.topRows(cloud.size()) = cloud.particles;
    for (int k = 0; k < cloud.dim(); ++k) mixed.particles(cloud.size(), k) = theta[k];
    mixed.weights.resize(cloud.size() + 1);
    mixed.weights.head(cloud.size()) = (1.0 - e) * cloud.weights;
    mixed.weights(cloud.size()) = e;
    const TabularPolicy moved = policy_from_cloud(mixed, features, mdp);
    return Matrix((moved.probs - base.probs) / e);
  };
  // One-sided quotient has an O(eps) bias; two Richardson levels.
  const Matrix d1 = mixture_quotient(eps);
  const Matrix d2 = mixture_quotient(0.5 * eps);
  const Matrix d4 = mixture_quotient(0.25 * eps);
  const Matrix r1 = 2.0 * d2 - d1;
  const Matrix r2 = 2.0 * d4 - d2;
  const Matrix fd = (4.0 * r2 - r1) / 3.0;

  DerivativeReport out;
  out.max_abs_error = (fd - centred).cwiseAbs().maxCoeff();
  out.scale = centred.cwiseAbs().maxCoeff();
  out.rel_error = out.scale > 0.0 ? out.max_abs_error / out.scale : out.max_abs_error;
  return out;
}

// ---------------------------------------------------------------------------

RateFit rate_fit(const std::vector<double>& times, const std::vector<double>& values, double t_lo, double t_hi) {
  if (times.size() != values.size()) throw ValidationError("rate_fit: times and values differ in length");
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (!(values[i] > 0.0)) {
      throw NumericalError("rate_fit: nonpositive value at t = " + std::to_string(times[i]) + ", log undefined");
    }
    ts.push_back(times[i]);
    ys.push_back(std::log(values[i]));
  }
  if (ts.size() < 3) throw ValidationError("rate_fit: fewer than 3 points in the window");
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(stt > 0.0)) throw ValidationError("rate_fit: window contains a single time");
  RateFit out;
  out.slope = sty / stt;
  out.intercept = my - out.slope * mt;
  out.points = static_cast<int>(ts.size());
  double ssr = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (out.intercept + out.slope * ts[i]);
    ssr += r * r;
  }
  out.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return out;
}

RateFit rate_fit(const Trajectory& trajectory, const ParticleCloud& reference, double t_lo, double t_hi,
                 const WassersteinOptions& options) {
  std::vector<double> ts, ws;
  for (const auto& rec : trajectory.records) {
    if (rec.time < t_lo || rec.time > t_hi) continue;
    if (!rec.snapshot) throw ValidationError("rate_fit: trajectory records carry no cloud snapshots");
    ts.push_back(rec.time);
    ws.push_back(wasserstein(*rec.snapshot, reference, 2, options));
  }
  return rate_fit(ts, ws, t_lo, t_hi);
}

StationarityReport stationarity_residual(const ParticleCloud& cloud, const Vector& first_variation, double sigma,
                                         const GaussianPrior& prior) {
  require_valid(cloud);
  if (first_variation.size() != cloud.size()) throw ValidationError("stationarity_residual: size mismatch");
  if (!(sigma >= 0.0)) throw ValidationError("stationarity_residual: sigma must be >= 0");
  StationarityReport out;
  Vector h = first_variation;
  if (sigma > 0.0) {
    Vector log_nu;
    try {
      log_nu = gaussian_log_density(cloud);
      out.density = "gaussian";
    } catch (const NumericalError&) {
      log_nu = knn_log_density(cloud);
      out.density = "knn";
    }
    const double half_var = 0.5 * sigma * sigma;
    for (int i = 0; i < cloud.size(); ++i) h(i) -= half_var * (prior.value(cloud.particle(i)) + log_nu(i));
  } else {
    out.density = "none";
  }
  out.mean = cloud.weights.dot(h);
  double var = 0.0;
  for (int i = 0; i < cloud.size(); ++i) var += cloud.weights(i) * (h(i) - out.mean) * (h(i) - out.mean);
  out.residual = std::sqrt(var);
  return out;
}

StationarityReport stationarity_residual(const FiniteMdp& mdp, const FeatureMap& features, const ParticleCloud& cloud,
                                         double tau, double sigma, const GaussianPrior& prior,
                                         const StateDistribution& rho) {
  const MeanFieldState state = evaluate_state(mdp, features, cloud, tau, rho);
  Vector fv(cloud.size());
  for (int i = 0; i < cloud.size(); ++i) fv(i) = first_variation(state, features, cloud.particle(i));
  return stationarity_residual(cloud, fv, sigma, prior);
}

// ---------------------------------------------------------------------------

SensitivityReport sensitivity_check(const FiniteMdp& mdp, const FeatureMap& features, const FlowConfig& a,
                                    const FlowConfig& b, const ParticleCloud& init_a, const ParticleCloud& init_b,
                                    const SensitivityOptions& options) {
  require_valid(a);
  require_valid(b);
  if (a.m != b.m || a.eta != b.eta || a.steps != b.steps || a.record_every != b.record_every) {
    throw ValidationError("sensitivity_check: configs must share m, eta, steps and record_every");
  }
  if (a.seed != b.seed) throw ValidationError("sensitivity_check: coupled flows need the same seed");
  if (init_a.size() != a.m || init_b.size() != b.m) throw ValidationError("sensitivity_check: init size != m");
  if (!(options.hat_tau >= 0.0)) throw ValidationError("sensitivity_check: hat_tau must be >= 0");

  const int d = init_a.dim();
  const GaussianPrior prior_a = a.prior(d);
  const GaussianPrior prior_b = b.prior(d);
  SensitivityReport out;
  out.c1 = theoretical_constants(constants_input(mdp, features, options.hat_tau, 0.0, 0.0)).c1;

  // Constants for the W2 flow bound use the parameters of flow a.
  const ConstantsReport ka =
      theoretical_constants(constants_input(mdp, features, a.tau, prior_a.dissipativity(), a.sigma));
  const double sig_gap = std::abs(a.sigma * a.sigma - b.sigma * b.sigma);
  double ell = 0.0;
  if (options.young_ell) {
    ell = *options.young_ell;
    if (!(ell > 0.0)) throw ValidationError("sensitivity_check: young_ell must be > 0");
    out.beta_ell = ka.beta - ell * sig_gap;
  }
  const double forcing = ka.d * std::abs(a.tau - b.tau) + d * (a.sigma - b.sigma) * (a.sigma - b.sigma);

  WassersteinOptions wopt;
  wopt.method = options.w2_method;
  wopt.seed = a.seed;

  ParticleCloud ca = init_a;
  ParticleCloud cb = init_b;
  double w2_sq_initial = 0.0;
  // History of (time, E|grad U|^2 under cloud b) for the trapezoid integral.
  std::vector<std::pair<double, double>> grad_u_history;
  auto mean_grad_u_sq = [&](const ParticleCloud& c) {
    std::vector<double> g(d);
    double acc = 0.0;
    for (int i = 0; i < c.size(); ++i) {
      prior_b.gradient(c.particle(i), g);
      double sq = 0.0;
      for (double x : g) sq += x * x;
      acc += c.weights(i) * sq;
    }
    return acc;
  };

  for (long k = 0;; ++k) {
    const MeanFieldState sa = evaluate_state(mdp, features, ca, a.tau, mdp.rho);
    const MeanFieldState sb = evaluate_state(mdp, features, cb, b.tau, mdp.rho);
    const double t = static_cast<double>(k) * a.eta;
    if (out.beta_ell) grad_u_history.emplace_back(t, mean_grad_u_sq(cb));

    if (k % a.record_every == 0 || k == a.steps) {
      SensitivityRecord rec;
      rec.step = k;
      rec.time = t;
      rec.w2 = wasserstein(ca, cb, 2, wopt);
      const double va = objective(mdp, features, ca, options.hat_tau, mdp.rho);
      const double vb = objective(mdp, features, cb, options.hat_tau, mdp.rho);
      rec.value_gap = std::abs(va - vb);
      rec.bound = out.c1 * rec.w2 + 1e-9;
      rec.ok = rec.value_gap <= rec.bound;
      if (!rec.ok) ++out.violations;
      if (k == 0) w2_sq_initial = rec.w2 * rec.w2;
      if (out.beta_ell) {
        const double beta = *out.beta_ell;
        double integral = 0.0;
        for (std::size_t j = 1; j < grad_u_history.size(); ++j) {
          const auto [t0, g0] = grad_u_history[j - 1];
          const auto [t1, g1] = grad_u_history[j];
          integral += 0.5 * (t1 - t0) * (std::exp(2.0 * beta * (t0 - t)) * g0 + std::exp(2.0 * beta * (t1 - t)) * g1);
        }
        const double relax = beta == 0.0 ? t : (1.0 - std::exp(-2.0 * beta * t)) / (2.0 * beta);
        const double bound = std::exp(-2.0 * beta * t) * w2_sq_initial + sig_gap / (8.0 * ell) * integral +
                             forcing * relax;
        rec.w2_sq_bound = bound;
        rec.w2_within_bound = rec.w2 * rec.w2 <= bound + 1e-9;
      }
      out.records.push_back(rec);
    }
    if (k == a.steps) break;
    const RowMatrix ga = flow_gradient(sa, features, ca);
    const RowMatrix gb = flow_gradient(sb, features, cb);
    ca = step(ca, ga, a, k, prior_a);
    cb = step(cb, gb, b, k, prior_b);
  }
  return out;
}

}  // namespace mfpg
