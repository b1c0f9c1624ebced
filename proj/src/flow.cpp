#include "mfpg/flow.hpp"

#include "mfpg/parallel.hpp"
#include "mfpg/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mfpg {

GaussianPrior FlowConfig::prior(int dim) const {
  if (prior_mean.size() == 1) return GaussianPrior(dim, prior_mean[0], prior_scale);
  if (static_cast<int>(prior_mean.size()) != dim) {
    throw ValidationError("prior mean has length " + std::to_string(prior_mean.size()) + ", expected 1 or " +
                          std::to_string(dim));
  }
  return GaussianPrior(Eigen::Map<const Vector>(prior_mean.data(), dim), prior_scale);
}

void require_valid(const FlowConfig& c) {
  if (!(c.tau >= 0.0) || !std::isfinite(c.tau)) throw ValidationError("flow: tau must be >= 0");
  if (!(c.sigma >= 0.0) || !std::isfinite(c.sigma)) throw ValidationError("flow: sigma must be >= 0");
  if (!(c.eta > 0.0) || !std::isfinite(c.eta)) throw ValidationError("flow: eta must be > 0");
  if (c.m < 1) throw ValidationError("flow: m must be >= 1");
  if (c.steps < 0) throw ValidationError("flow: steps must be >= 0");
  if (c.record_every < 1) throw ValidationError("flow: record_every must be >= 1");
  if (!(c.prior_scale > 0.0)) throw ValidationError("flow: prior scale must be > 0");
  if (c.prior_mean.empty()) throw ValidationError("flow: prior mean must not be empty");
}

ParticleCloud step(const ParticleCloud& cloud, const RowMatrix& g, const FlowConfig& config, long step_index,
                   const GaussianPrior& prior) {
  if (!cloud.has_uniform_weights()) throw ValidationError("step: particle dynamics requires uniform weights");
  if (g.rows() != cloud.size() || g.cols() != cloud.dim()) throw ValidationError("step: gradient shape mismatch");
  if (prior.dim() != cloud.dim()) throw ValidationError("step: prior dimension mismatch");
  if (config.eta == 0.0) return cloud;

  ParticleCloud out = cloud;
  const double eta = config.eta;
  const double half_var = 0.5 * config.sigma * config.sigma;
  const double noise_scale = std::sqrt(eta) * config.sigma;
  const CounterRng rng(config.seed, Stream::flow_noise);
  const int d = cloud.dim();
  parallel_for(cloud.size(), [&](std::size_t i) {
    const auto theta = cloud.particle(static_cast<int>(i));
    auto next = out.particle(static_cast<int>(i));
    std::vector<double> grad_u(d);
    prior.gradient(theta, grad_u);
    for (int k = 0; k < d; ++k) {
      double x = theta[k] + eta * (g(static_cast<long>(i), k) - half_var * grad_u[k]);
      if (noise_scale != 0.0) x += noise_scale * rng.normal(static_cast<std::uint64_t>(step_index), i, k);
      next[k] = x;
    }
  });
  return out;
}

ParticleCloud sample_prior(const GaussianPrior& prior, int m, std::uint64_t seed) {
  if (m < 1) throw ValidationError("sample_prior: m must be >= 1");
  const CounterRng rng(seed, Stream::prior_init);
  RowMatrix theta(m, prior.dim());
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < prior.dim(); ++k) theta(i, k) = prior.mean()(k) + prior.scale() * rng.normal(i, k);
  }
  return ParticleCloud::uniform(std::move(theta));
}

double TrajectoryRecord::get(const std::string& name) const {
  for (const auto& [key, value] : diagnostics) {
    if (key == name) return value;
  }
  throw std::out_of_range("trajectory record has no diagnostic '" + name + "'");
}

Trajectory run_flow(const FiniteMdp& mdp, const FeatureMap& features, const FlowConfig& config,
                    const ParticleCloud& init, const std::vector<Probe>& probes, const RunOptions& options) {
  require_valid(config);
  require_valid(init);
  if (init.size() != config.m) throw ValidationError("run_flow: initial cloud size differs from config.m");
  if (!init.has_uniform_weights()) throw ValidationError("run_flow: initial cloud must have uniform weights");
  const GaussianPrior prior = config.prior(init.dim());

  Trajectory traj;
  ParticleCloud cloud = init;
  for (long k = 0;; ++k) {
    const MeanFieldState state = evaluate_state(mdp, features, cloud, config.tau, mdp.rho);
    const RowMatrix g = flow_gradient(state, features, cloud);
    if (k % config.record_every == 0 || k == config.steps) {
      TrajectoryRecord rec;
      rec.step = k;
      rec.time = static_cast<double>(k) * config.eta;
      const ProbeContext ctx{k, rec.time, cloud, state, g};
      for (const auto& probe : probes) rec.diagnostics.emplace_back(probe.name, probe.evaluate(ctx));
      if (options.keep_snapshots) rec.snapshot = cloud;
      traj.records.push_back(std::move(rec));
    }
    if (k == config.steps) break;
    cloud = step(cloud, g, config, k, prior);
  }
  traj.final_cloud = std::move(cloud);
  return traj;
}

}  // namespace mfpg
