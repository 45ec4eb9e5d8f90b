#include "sphertap/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sphertap/analytic.hpp"

namespace sphertap::coarse {

namespace {

CoarseGrid partition_from_sorted(const Vec& values, int K, long N) {
  CoarseGrid grid;
  grid.K = K;
  grid.N = N;
  if (K == 1) {
    grid.x = {-kSqrt2};
    grid.mu = {1.0};
    return grid;
  }
  const double width = 2.0 * kSqrt2 / K;
  Vec x(K), count(K, 0.0);
  for (int k = 0; k < K; ++k) x[k] = -kSqrt2 + width * k;
  for (double v : values) {
    int k = static_cast<int>(std::floor((v + kSqrt2) / width));
    k = std::clamp(k, 0, K - 1);
    // Half-open blocks [x_k, x_{k+1}); the last block is closed on the
    // right so the top of the support lands in block K-1.
    if (k + 1 < K && v >= x[k + 1]) ++k;
    if (k > 0 && v < x[k]) --k;
    count[k] += 1.0;
  }
  // Merge empty blocks into the left neighbor (drop their grid point);
  // an empty leading run merges rightward so x_1 = -sqrt2 survives.
  Vec xs, mus;
  const double n = static_cast<double>(values.size());
  for (int k = 0; k < K; ++k) {
    if (count[k] > 0.0) {
      xs.push_back(x[k]);
      mus.push_back(count[k] / n);
    } else if (xs.empty() && k + 1 < K) {
      // keep -sqrt2 as the pending left edge of the first nonempty block
      continue;
    }
  }
  if (xs.empty()) throw std::domain_error("build_partition: empty spectrum");
  xs.front() = -kSqrt2;
  grid.x = std::move(xs);
  grid.mu = std::move(mus);
  return grid;
}

}  // namespace

CoarseGrid build_partition(long N, int K) {
  if (K < 1 || static_cast<long>(K) > N)
    throw std::domain_error("build_partition: need N >= K >= 1");
  Vec theta(N);
  for (long i = 1; i <= N; ++i)
    theta[i - 1] =
        analytic::classical_location(static_cast<double>(i) / static_cast<double>(N));
  return partition_from_sorted(theta, K, N);
}

CoarseGrid build_partition_from_spectrum(const Vec& spectrum, int K) {
  if (K < 1 || spectrum.size() < static_cast<std::size_t>(K))
    throw std::domain_error("build_partition_from_spectrum: need N >= K >= 1");
  if (!std::is_sorted(spectrum.begin(), spectrum.end()))
    throw std::invalid_argument("build_partition_from_spectrum: not sorted");
  return partition_from_sorted(spectrum, K, static_cast<long>(spectrum.size()));
}

int block_index(const CoarseGrid& grid, double value) {
  const auto it = std::upper_bound(grid.x.begin(), grid.x.end(), value);
  if (it == grid.x.begin()) return 0;
  return static_cast<int>(it - grid.x.begin()) - 1;
}

double g_K(const CoarseGrid& grid, double lambda) {
  if (!(lambda > grid.x.back()))
    throw std::domain_error("g_K: lambda <= x_K");
  double s = 0.0;
  for (std::size_t k = 0; k < grid.x.size(); ++k)
    s += grid.mu[k] / (lambda - grid.x[k]);
  return s;
}

double h_K(const CoarseGrid& grid, double lambda) {
  if (!(lambda > grid.x.back()))
    throw std::domain_error("h_K: lambda <= x_K");
  double s = 0.0;
  for (std::size_t k = 0; k < grid.x.size(); ++k)
    s += grid.mu[k] * std::log(lambda - grid.x[k]);
  return s;
}

double solve_lambda_K(const CoarseGrid& grid, double beta) {
  if (!(beta > 0.0)) throw std::domain_error("solve_lambda_K: beta <= 0");
  const double xK = grid.x.back();
  double lo = xK + 1e-14;
  double hi = xK + 1.0;
  while (g_K(grid, hi) >= 2.0 * beta) hi = xK + 2.0 * (hi - xK);
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (g_K(grid, mid) >= 2.0 * beta)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double free_energy_F_K(const CoarseGrid& grid, double beta) {
  const double lambda = solve_lambda_K(grid, beta);
  return beta * lambda - 0.5 - 0.5 * std::log(2.0 * beta) -
         0.5 * h_K(grid, lambda);
}

SimplexSolution simplex_optimum_oracle(const CoarseGrid& grid, double beta) {
  if (!(beta > 0.0))
    throw std::domain_error("simplex_optimum_oracle: beta <= 0");
  const std::size_t n = grid.x.size();
  const auto objective = [&](const Vec& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      s += beta * grid.x[k] * f[k] +
           0.5 * grid.mu[k] * std::log(f[k] / grid.mu[k]);
    return s;
  };

  Vec f = grid.mu;  // KL-centered start
  Vec g(n);
  const long kIters = 100000;
  for (long t = 1; t <= kIters; ++t) {
    double gmax = -1e300;
    for (std::size_t k = 0; k < n; ++k) {
      g[k] = beta * grid.x[k] + 0.5 * grid.mu[k] / f[k];
      gmax = std::max(gmax, g[k]);
    }
    const double eta = 1.0 / std::sqrt(static_cast<double>(t));
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      f[k] *= std::exp(eta * (g[k] - gmax));
      z += f[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
      f[k] /= z;
      if (!(f[k] >= 1e-300))
        throw std::runtime_error(
            "simplex_optimum_oracle: iterate left the simplex floor");
    }
  }

  const double lambda = solve_lambda_K(grid, beta);
  Vec fc(n);
  for (std::size_t k = 0; k < n; ++k)
    fc[k] = grid.mu[k] / (2.0 * beta * (lambda - grid.x[k]));

  SimplexSolution out;
  out.weights.f = std::move(f);
  out.value = objective(out.weights.f);
  out.closed_form.f = std::move(fc);
  return out;
}

double derivative_identity_check(const CoarseGrid& grid, double beta) {
  if (!(beta > 1e-3))
    throw std::domain_error("derivative_identity_check: beta <= 1e-3");
  const double d = 1e-5;
  const double fd =
      (free_energy_F_K(grid, beta + d) - free_energy_F_K(grid, beta - d)) /
      (2.0 * d);
  const double rhs = solve_lambda_K(grid, beta) - 1.0 / (2.0 * beta);
  return std::abs(fd - rhs);
}

double plefka_threshold(const CoarseGrid& grid) {
  if (grid.blocks() < 2) throw std::domain_error("plefka_threshold: K < 2");
  return kSqrt2 - solve_lambda_K(grid, kInvSqrt2);
}

double blocking_error(const Vec& sigma, const CoarseGrid& grid,
                      const Vec& spectrum) {
  if (sigma.size() != spectrum.size())
    throw std::invalid_argument("blocking_error: dimension mismatch");
  if (std::abs(norm2(sigma) - 1.0) > 1e-8)
    throw std::invalid_argument("blocking_error: sigma not a unit vector");
  if (!std::is_sorted(spectrum.begin(), spectrum.end()))
    throw std::invalid_argument("blocking_error: spectrum not sorted");
  double exact = 0.0, blocked = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double w = sigma[i] * sigma[i];
    exact += spectrum[i] * w;
    blocked += grid.x[block_index(grid, spectrum[i])] * w;
  }
  return std::abs(exact - blocked);
}

}  // namespace sphertap::coarse
