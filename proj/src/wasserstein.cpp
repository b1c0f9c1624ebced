#include "mfpg/wasserstein.hpp"

#include "mfpg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mfpg {

namespace {

double power(double x, int p) { return p == 1 ? x : x * x; }

double root(double x, int p) { return p == 1 ? x : std::sqrt(std::max(0.0, x)); }

// Sum over matched mass of |x - y|^p for sorted weighted samples.
double transport_cost_1d(std::vector<double> xs, Vector wx, std::vector<double> ys, Vector wy, int p) {
  auto sort_by_value = [](std::vector<double>& v, Vector& w) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> v2(v.size());
    Vector w2(w.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      v2[k] = v[order[k]];
      w2(k) = w(order[k]);
    }
    v = std::move(v2);
    w = std::move(w2);
  };
  sort_by_value(xs, wx);
  sort_by_value(ys, wy);

  std::size_t i = 0;
  std::size_t j = 0;
  double left_x = wx(0);
  double left_y = wy(0);
  double cost = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double mass = std::min(left_x, left_y);
    cost += mass * power(std::abs(xs[i] - ys[j]), p);
    left_x -= mass;
    left_y -= mass;
    // Advance whichever side is exhausted; ties advance both.
    const bool done_x = left_x <= 1e-15;
    const bool done_y = left_y <= 1e-15;
    if (done_x) {
      ++i;
      if (i < xs.size()) left_x = wx(i);
    }
    if (done_y) {
      ++j;
      if (j < ys.size()) left_y = wy(j);
    }
    if (!done_x && !done_y) break;
  }
  return cost;
}

double exact_1d(const ParticleCloud& a, const ParticleCloud& b, int p) {
  if (a.dim() != 1 || b.dim() != 1) throw ValidationError("wasserstein exact_1d requires d = 1");
  std::vector<double> xs(a.particles.data(), a.particles.data() + a.size());
  std::vector<double> ys(b.particles.data(), b.particles.data() + b.size());
  return root(transport_cost_1d(std::move(xs), a.weights, std::move(ys), b.weights, p), p);
}

void require_assignment_shape(const ParticleCloud& a, const ParticleCloud& b) {
  if (a.size() != b.size()) throw ValidationError("wasserstein assignment requires equal particle counts");
  if (!a.has_uniform_weights() || !b.has_uniform_weights()) {
    throw ValidationError("wasserstein assignment requires uniform weights");
  }
  if (a.size() > 512) throw ValidationError("wasserstein assignment is limited to m <= 512");
}

double assignment(const ParticleCloud& a, const ParticleCloud& b, int p) {
  require_assignment_shape(a, b);
  const int m = a.size();
  Matrix cost(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) cost(i, j) = power((a.particles.row(i) - b.particles.row(j)).norm(), p);
  }
  const std::vector<int> match = hungarian(cost);
  double total = 0.0;
  for (int i = 0; i < m; ++i) total += cost(i, match[i]);
  return root(total / m, p);
}

double sliced(const ParticleCloud& a, const ParticleCloud& b, int p, int projections, std::uint64_t seed) {
  if (projections < 1) throw ValidationError("wasserstein sliced requires a positive projection count");
  const int d = a.dim();
  const CounterRng rng(seed, Stream::projections);
  double acc = 0.0;
  for (int k = 0; k < projections; ++k) {
    Vector dir(d);
    for (int j = 0; j < d; ++j) dir(j) = rng.normal(k, j);
    dir /= dir.norm();
    std::vector<double> xs(a.size());
    std::vector<double> ys(b.size());
    for (int i = 0; i < a.size(); ++i) xs[i] = a.particles.row(i).dot(dir.transpose());
    for (int i = 0; i < b.size(); ++i) ys[i] = b.particles.row(i).dot(dir.transpose());
    acc += transport_cost_1d(std::move(xs), a.weights, std::move(ys), b.weights, p);
  }
  return root(acc / projections, p);
}

}  // namespace

double wasserstein_1d(std::vector<double> xs, Vector wx, std::vector<double> ys, Vector wy, int p) {
  if (p != 1 && p != 2) throw ValidationError("wasserstein: p must be 1 or 2");
  if (xs.empty() || ys.empty()) throw ValidationError("wasserstein: empty sample");
  return root(transport_cost_1d(std::move(xs), std::move(wx), std::move(ys), std::move(wy), p), p);
}

std::vector<int> hungarian(const Matrix& cost) {
  // Shortest augmenting path with row/column potentials, O(n^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw ValidationError("hungarian: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(n);
  for (int j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

WassersteinResult wasserstein_report(const ParticleCloud& a, const ParticleCloud& b, int p,
                                     const WassersteinOptions& options) {
  if (p != 1 && p != 2) throw ValidationError("wasserstein: p must be 1 or 2");
  require_valid(a);
  require_valid(b);
  if (a.dim() != b.dim()) throw ValidationError("wasserstein: clouds have different dimensions");
  WassersteinMethod method = options.method;
  if (method == WassersteinMethod::automatic) {
    if (a.dim() == 1) {
      method = WassersteinMethod::exact_1d;
    } else if (a.size() == b.size() && a.size() <= 512 && a.has_uniform_weights() && b.has_uniform_weights()) {
      method = WassersteinMethod::assignment;
    } else {
      method = WassersteinMethod::sliced;
    }
  }
  WassersteinResult out;
  out.method = method;
  switch (method) {
    case WassersteinMethod::exact_1d:
      out.value = exact_1d(a, b, p);
      break;
    case WassersteinMethod::assignment:
      out.value = assignment(a, b, p);
      break;
    case WassersteinMethod::sliced:
      out.value = sliced(a, b, p, options.projections, options.seed);
      out.lower_bound = true;
      break;
    case WassersteinMethod::automatic:
      break;
  }
  return out;
}

double wasserstein(const ParticleCloud& a, const ParticleCloud& b, int p, const WassersteinOptions& options) {
  return wasserstein_report(a, b, p, options).value;
}

double wasserstein(const ParticleCloud& a, const ParticleCloud& b, int p, WassersteinMethod method) {
  WassersteinOptions options;
  options.method = method;
  return wasserstein_report(a, b, p, options).value;
}

namespace {

Matrix psd_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Vector vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

double gaussian_w2(const Vector& m1, const Matrix& s1, const Vector& m2, const Matrix& s2) {
  const Matrix r2 = psd_sqrt(s2);
  const Matrix cross = psd_sqrt(r2 * s1 * r2);
  const double bures = (s1 + s2 - 2.0 * cross).trace();
  return std::sqrt(std::max(0.0, (m1 - m2).squaredNorm() + bures));
}

std::string to_string(WassersteinMethod method) {
  switch (method) {
    case WassersteinMethod::automatic:
      return "auto";
    case WassersteinMethod::exact_1d:
      return "exact_1d";
    case WassersteinMethod::assignment:
      return "assignment";
    case WassersteinMethod::sliced:
      return "sliced";
  }
  return "auto";
}

WassersteinMethod parse_wasserstein_method(const std::string& name) {
  if (name == "auto") return WassersteinMethod::automatic;
  if (name == "exact_1d") return WassersteinMethod::exact_1d;
  if (name == "assignment") return WassersteinMethod::assignment;
  if (name == "sliced") return WassersteinMethod::sliced;
  throw ValidationError("unknown wasserstein method '" + name + "'");
}

}  // namespace mfpg
