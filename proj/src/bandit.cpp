#include "mfpg/bandit.hpp"

#include "mfpg/estimators.hpp"
#include "mfpg/flow.hpp"
#include "mfpg/gradient.hpp"
#include "mfpg/parallel.hpp"
#include "mfpg/policy.hpp"
#include "mfpg/rng.hpp"
#include "mfpg/wasserstein.hpp"

#include <cmath>
#include <numbers>

namespace mfpg {

void require_valid(const BanditSpec& s) {
  if (s.ell.size() < 1) throw ValidationError("bandit: ell must have at least one entry");
  if (s.m_u.size() != s.ell.size()) throw ValidationError("bandit: m_u and ell differ in length");
  if (!(s.lambda > 0.0)) throw ValidationError("bandit: lambda must be > 0");
  if (!(s.tau > 0.0)) throw ValidationError("bandit: tau must be > 0");
  if (!(s.sigma_u > 0.0)) throw ValidationError("bandit: sigma_u must be > 0");
  if (!(s.sigma >= 0.0)) throw ValidationError("bandit: sigma must be >= 0");
  if (!s.ell.allFinite() || !s.m_u.allFinite()) throw ValidationError("bandit: ell and m_u must be finite");
}

GaussianMoments analytic_optimal_policy(const BanditSpec& spec) {
  require_valid(spec);
  const int d = spec.dim();
  return {spec.ell / (2.0 * spec.lambda), Matrix::Identity(d, d) * (spec.tau / (2.0 * spec.lambda))};
}

StationaryMean analytic_stationary_mean(const BanditSpec& spec) {
  require_valid(spec);
  StationaryMean out;
  if (spec.sigma == 0.0) {
    out.mean = spec.ell / (2.0 * spec.lambda);
    out.unique = false;
    out.note = "infinitely many critical points; only the mean is determined";
    return out;
  }
  const double s2 = spec.sigma * spec.sigma;
  const double u2 = spec.sigma_u * spec.sigma_u;
  out.mean = (spec.m_u * s2 + 2.0 * u2 * spec.ell) / (s2 + 4.0 * spec.lambda * u2);
  return out;
}

double mean_decay_rate(const BanditSpec& spec) {
  return 2.0 * spec.lambda + spec.sigma * spec.sigma / (2.0 * spec.sigma_u * spec.sigma_u);
}

Vector mean_equilibrium(const BanditSpec& spec) {
  require_valid(spec);
  const double k = spec.sigma * spec.sigma / (2.0 * spec.sigma_u * spec.sigma_u);
  return (spec.ell + k * spec.m_u) / mean_decay_rate(spec);
}

Vector analytic_mean_trajectory(const BanditSpec& spec, const Vector& m0, double t) {
  if (!(t >= 0.0)) throw ValidationError("analytic_mean_trajectory: t must be >= 0");
  if (m0.size() != spec.dim()) throw ValidationError("analytic_mean_trajectory: m0 has wrong length");
  const Vector m_inf = mean_equilibrium(spec);
  return m_inf + (m0 - m_inf) * std::exp(-mean_decay_rate(spec) * t);
}

GaussianMoments analytic_stationary_measure(const BanditSpec& spec) {
  const int d = spec.dim();
  const double var = spec.sigma > 0.0 ? spec.sigma_u * spec.sigma_u : 0.0;
  return {analytic_stationary_mean(spec).mean, Matrix::Identity(d, d) * var};
}

double bandit_rate(const BanditSpec& spec) {
  return 0.5 * spec.sigma * spec.sigma / (spec.sigma_u * spec.sigma_u);
}

GaussianPrior bandit_prior(const BanditSpec& spec) { return GaussianPrior(spec.m_u, spec.sigma_u); }

Vector bandit_first_variation(const BanditSpec& spec, const ParticleCloud& cloud) {
  const Vector slope = spec.ell - 2.0 * spec.lambda * cloud.mean();
  Vector out(cloud.size());
  for (int i = 0; i < cloud.size(); ++i) out(i) = cloud.particles.row(i).dot(slope.transpose());
  return out;
}

double bandit_objective(const BanditSpec& spec, const ParticleCloud& cloud) {
  require_valid(spec);
  const int d = spec.dim();
  const Vector bar = cloud.mean();
  const double policy_var = spec.tau / (2.0 * spec.lambda);
  double j = bar.dot(spec.ell) - spec.lambda * (d * policy_var + bar.squaredNorm()) +
             0.5 * spec.tau * d * (std::log(2.0 * std::numbers::pi * policy_var) + 1.0);
  if (spec.sigma > 0.0) j -= 0.5 * spec.sigma * spec.sigma * kl_estimate(cloud, bandit_prior(spec), KlMethod::gaussian_proxy);
  return j;
}

namespace {

double w2_to_star(const ParticleCloud& cloud, const GaussianMoments& star) {
  return gaussian_w2(cloud.mean(), cloud.covariance(), star.mean, star.covariance);
}

}  // namespace

BanditTrajectory simulate_bandit_flow(const BanditSpec& spec, int m, double eta, long steps, std::uint64_t seed,
                                      const BanditSimOptions& options) {
  require_valid(spec);
  if (m < 1) throw ValidationError("bandit: m must be >= 1");
  if (!(eta > 0.0)) throw ValidationError("bandit: eta must be > 0");
  if (steps < 0) throw ValidationError("bandit: steps must be >= 0");
  if (options.record_every < 1) throw ValidationError("bandit: record_every must be >= 1");
  const int d = spec.dim();
  const GaussianPrior prior = bandit_prior(spec);

  ParticleCloud cloud = options.init ? *options.init : sample_prior(prior, m, seed);
  if (cloud.size() != m || cloud.dim() != d) throw ValidationError("bandit: initial cloud has wrong shape");
  if (!cloud.has_uniform_weights()) throw ValidationError("bandit: initial cloud must have uniform weights");

  const GaussianMoments star = analytic_stationary_measure(spec);
  const double pull = spec.sigma * spec.sigma / (2.0 * spec.sigma_u * spec.sigma_u);
  const double noise = std::sqrt(eta) * spec.sigma;
  const CounterRng rng(seed, Stream::flow_noise);

  BanditTrajectory out;
  out.initial_mean = cloud.mean();
  for (long k = 0;; ++k) {
    const Vector bar = cloud.mean();
    if (k % options.record_every == 0 || k == steps) {
      BanditRecord rec;
      rec.step = k;
      rec.time = static_cast<double>(k) * eta;
      rec.mean = bar;
      rec.analytic_mean = analytic_mean_trajectory(spec, out.initial_mean, rec.time);
      rec.w2_to_star = w2_to_star(cloud, star);
      rec.objective = bandit_objective(spec, cloud);
      out.records.push_back(std::move(rec));
    }
    if (k == steps) break;
    const Vector shared = spec.ell - 2.0 * spec.lambda * bar;
    parallel_for(m, [&](std::size_t i) {
      auto theta = cloud.particle(static_cast<int>(i));
      for (int j = 0; j < d; ++j) {
        double x = theta[j] + eta * (shared(j) - pull * (theta[j] - spec.m_u(j)));
        if (noise != 0.0) x += noise * rng.normal(static_cast<std::uint64_t>(k), i, j);
        theta[j] = x;
      }
    });
  }
  out.final_cloud = std::move(cloud);
  return out;
}

ParticleCloud stationary_sample(const BanditSpec& spec, int m, std::uint64_t seed, bool stratified) {
  if (m < 1) throw ValidationError("stationary_sample: m must be >= 1");
  const GaussianMoments star = analytic_stationary_measure(spec);
  const int d = spec.dim();
  const double sd = std::sqrt(star.covariance(0, 0));
  RowMatrix theta(m, d);
  const CounterRng rng(seed, Stream::reference);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < d; ++k) {
      const double z = (stratified && d == 1) ? normal_quantile((i + 0.5) / m) : rng.normal(i, k);
      theta(i, k) = star.mean(k) + sd * z;
    }
  }
  return ParticleCloud::uniform(std::move(theta));
}

// ---------------------------------------------------------------------------

CrosscheckModel crosscheck_model(const BanditSpec& spec, int grid) {
  require_valid(spec);
  if (spec.dim() != 1) throw ValidationError("crosscheck: only d = 1 is supported");
  if (grid < 16) throw ValidationError("crosscheck: grid must have at least 16 cells, got " + std::to_string(grid));
  const double centre = analytic_stationary_mean(spec).mean(0);
  const double sd = std::sqrt(spec.tau / (2.0 * spec.lambda));
  const double half = 5.0 * sd;
  const double width = 2.0 * half / grid;
  if (sd < 2.0 * width) {
    throw ValidationError("crosscheck: grid too coarse, policy std spans fewer than 2 cells");
  }
  std::vector<double> xs(grid);
  FiniteMdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = grid;
  mdp.gamma = 0.0;
  mdp.transition = Matrix::Ones(grid, 1);
  mdp.reward.resize(1, grid);
  mdp.mu = Vector::Constant(grid, width);
  mdp.rho = Vector::Ones(1);
  const double ell = spec.ell(0);
  for (int j = 0; j < grid; ++j) {
    xs[j] = centre - half + (j + 0.5) * width;
    mdp.reward(0, j) = ell * xs[j] - spec.lambda * xs[j] * xs[j];
  }
  require_valid(mdp);
  ClippedQuadraticFeature feature(xs, spec.lambda, spec.tau, centre, half);
  return {std::move(mdp), std::move(feature), centre, sd, width};
}

CrosscheckReport discretized_crosscheck(const BanditSpec& spec, int grid, const CrosscheckOptions& options) {
  const CrosscheckModel model = crosscheck_model(spec, grid);
  FlowConfig cfg;
  cfg.tau = spec.tau;
  cfg.sigma = spec.sigma;
  cfg.eta = options.eta;
  cfg.m = options.m;
  cfg.steps = options.steps;
  cfg.seed = options.seed;
  cfg.record_every = 1;
  cfg.prior_mean = {spec.m_u(0)};
  cfg.prior_scale = spec.sigma_u;
  const GaussianPrior prior = cfg.prior(1);
  const ParticleCloud init = sample_prior(prior, cfg.m, cfg.seed);

  const std::vector<double>& xs = model.feature.grid();
  const long start = static_cast<long>(options.average_from * static_cast<double>(options.steps));
  Probe policy_mean{"policy_mean", [&](const ProbeContext& ctx) {
                      double acc = 0.0;
                      for (int j = 0; j < grid; ++j) acc += ctx.state.policy(0, j) * xs[j];
                      return acc;
                    }};
  const Trajectory traj = run_flow(model.mdp, model.feature, cfg, init, {policy_mean});

  CrosscheckReport out;
  out.grid = grid;
  out.cell_width = model.cell_width;
  out.analytic_mean = analytic_stationary_mean(spec).mean(0);
  double acc = 0.0;
  for (const auto& rec : traj.records) {
    if (rec.step < start) continue;
    acc += rec.get("policy_mean");
    ++out.samples;
  }
  out.policy_mean = acc / static_cast<double>(out.samples);
  out.error = std::abs(out.policy_mean - out.analytic_mean);
  return out;
}

}  // namespace mfpg
