#include "sphertap/finite_fe.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "sphertap/analytic.hpp"
#include "sphertap/quad.hpp"
#include "sphertap/rng.hpp"

namespace sphertap::finite_fe {

namespace {

// log of the normalizing constant Gamma(N/2)/(sqrt(pi) Gamma((N-1)/2)).
double log_density_const(long N) {
  const double half = 0.5 * static_cast<double>(N);
  return -0.5 * std::log(M_PI) + std::lgamma(half) - std::lgamma(half - 0.5);
}

double log_inner_product_density(double x, long N) {
  return log_density_const(N) +
         0.5 * static_cast<double>(N - 3) * std::log1p(-x * x);
}

// (1/(2n)) sum 1/(t - beta theta_i); decreasing in t beyond the top pole.
double saddle_sum(const Vec& spectrum, double beta, double t) {
  double s = 0.0;
  for (double th : spectrum) s += 1.0 / (t - beta * th);
  return 0.5 * s / static_cast<double>(spectrum.size());
}

// Integrated autocorrelation time of a trace by the truncated-rho sum.
double integrated_autocorrelation(const Vec& trace) {
  const long T = static_cast<long>(trace.size());
  if (T < 10) return 1.0;
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= static_cast<double>(T);
  double var = 0.0;
  for (double v : trace) var += (v - mean) * (v - mean);
  var /= static_cast<double>(T);
  if (var <= 0.0) return 1.0;
  double tau = 1.0;
  const long max_lag = std::min<long>(T / 3, 2000);
  for (long lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (long t = 0; t + lag < T; ++t)
      c += (trace[t] - mean) * (trace[t + lag] - mean);
    c /= static_cast<double>(T - lag);
    const double rho = c / var;
    if (rho < 0.05) break;
    tau += 2.0 * rho;
  }
  return std::max(1.0, tau);
}

}  // namespace

double inner_product_density(double x, long N) {
  if (N < 4) throw std::domain_error("inner_product_density: N < 4");
  if (x <= -1.0 || x >= 1.0) return 0.0;
  return std::exp(log_inner_product_density(x, N));
}

Vec block_norms(const Vec& sigma, const coarse::CoarseGrid& grid,
                const Vec& spectrum) {
  if (sigma.size() != spectrum.size())
    throw std::invalid_argument("block_norms: dimension mismatch");
  if (std::abs(norm2(sigma) - 1.0) > 1e-6)
    throw std::invalid_argument("block_norms: sigma must be a unit vector");
  Vec s(static_cast<std::size_t>(grid.blocks()), 0.0);
  for (std::size_t i = 0; i < sigma.size(); ++i)
    s[coarse::block_index(grid, spectrum[i])] += sigma[i] * sigma[i];
  return s;
}

double dirichlet_moment_check(long N, const coarse::CoarseGrid& grid,
                              long num_samples, std::uint64_t seed) {
  if (num_samples < 1000)
    throw std::invalid_argument("dirichlet_moment_check: need >= 1000 samples");
  const auto theta = analytic::classical_spectrum(static_cast<int>(N));
  const int K = grid.blocks();
  std::vector<long> counts(static_cast<std::size_t>(K), 0);
  std::vector<int> index(static_cast<std::size_t>(N));
  for (long i = 0; i < N; ++i) {
    index[i] = coarse::block_index(grid, theta[i]);
    ++counts[index[i]];
  }

  std::vector<double> pow1(K, 0.0), pow2(K, 0.0), pow4(K, 0.0);
  Rng rng(seed);
  for (long s = 0; s < num_samples; ++s) {
    Vec g = rng.gaussian_vec(N);
    const double nrm = norm2(g);
    Vec sk(static_cast<std::size_t>(K), 0.0);
    for (long i = 0; i < N; ++i) {
      const double c = g[i] / nrm;
      sk[index[i]] += c * c;
    }
    for (int k = 0; k < K; ++k) {
      const double sq = sk[k] * sk[k];
      pow1[k] += sk[k];
      pow2[k] += sq;
      pow4[k] += sq * sq;
    }
  }

  const double S = static_cast<double>(num_samples);
  const double dN = static_cast<double>(N);
  double worst = 0.0;
  for (int k = 0; k < K; ++k) {
    const double nk = static_cast<double>(counts[k]);
    // Dirichlet(n_1/2, ..., n_K/2) moments of one coordinate.
    const double m1 = nk / dN;
    const double m2 = nk * (nk + 2.0) / (dN * (dN + 2.0));
    const double mean1 = pow1[k] / S;
    const double var1 = std::max(0.0, pow2[k] / S - mean1 * mean1);
    const double mean2 = pow2[k] / S;
    const double var2 = std::max(0.0, pow4[k] / S - mean2 * mean2);
    if (var1 > 0.0)
      worst = std::max(worst, std::abs(mean1 - m1) / std::sqrt(var1 / S));
    if (var2 > 0.0)
      worst = std::max(worst, std::abs(mean2 - m2) / std::sqrt(var2 / S));
  }
  return worst;
}

double pure_field_free_energy(long N, double h) {
  if (N < 4) throw std::domain_error("pure_field_free_energy: N < 4");
  if (h < 0.0) throw std::domain_error("pure_field_free_energy: h < 0");
  const double dN = static_cast<double>(N);
  auto log_f = [&](double x) {
    return log_inner_product_density(x, N) + dN * h * x;
  };
  // Peak-shift in log space so the quadrature integrand is O(1), and split
  // the interval at the peak so the refinement cannot step over a spike
  // whose width is O(1/sqrt(N)).
  double peak = -1e300, x_peak = 0.0;
  for (int i = 1; i < 4096; ++i) {
    const double x = -1.0 + 2.0 * i / 4096.0;
    const double lx = log_f(x);
    if (lx > peak) {
      peak = lx;
      x_peak = x;
    }
  }
  auto f = [&](double x) {
    if (x <= -1.0 || x >= 1.0) return 0.0;
    return std::exp(log_f(x) - peak);
  };
  const double integral = adaptive_simpson(f, -1.0, x_peak, 5e-13) +
                          adaptive_simpson(f, x_peak, 1.0, 5e-13);
  return (peak + std::log(integral)) / dN;
}

SaddlePoint no_field_saddle_fe(const Vec& spectrum, double beta) {
  if (spectrum.empty())
    throw std::invalid_argument("no_field_saddle_fe: empty spectrum");
  if (beta < 0.0) throw std::domain_error("no_field_saddle_fe: beta < 0");
  const long n = static_cast<long>(spectrum.size());

  double top = -1e300, second = -1e300;
  for (double th : spectrum) {
    if (th > top) {
      second = top;
      top = th;
    } else if (th > second) {
      second = th;
    }
  }
  if (n == 1) second = top;
  const double edge = beta * top;

  double hi = edge + 1.0;
  while (saddle_sum(spectrum, beta, hi) >= 1.0) hi = edge + 2.0 * (hi - edge);
  double lo = edge;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    if (saddle_sum(spectrum, beta, mid) >= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  const double t_star = 0.5 * (lo + hi);

  // In the condensed regime the saddle collapses onto the top pole, which
  // then carries a macroscopic share of the mass (1/(2N)) / (t* - edge);
  // the Laplace expansion around a simple pole is meaningless there. A
  // separated top level holding >= 20% triggers refusal.
  const double occupancy = 0.5 / (static_cast<double>(n) * (t_star - edge));
  if (beta > 0.0 && top > second && occupancy >= 0.2)
    throw std::runtime_error(
        "no_field_saddle_fe: saddle not found (condensation regime)");

  double log_term = 0.0, curvature = 0.0;
  for (double th : spectrum) {
    const double gap = t_star - beta * th;
    log_term += std::log(2.0 * gap);
    curvature += 1.0 / (gap * gap);
  }
  SaddlePoint sp;
  sp.t_star = t_star;
  sp.value = t_star - 0.5 - 0.5 * log_term / static_cast<double>(n);
  const double phi2 = 0.5 * curvature / static_cast<double>(n);
  sp.correction = 0.5 * std::log(2.0 / phi2) / static_cast<double>(n);
  return sp;
}

double restricted_two_slice_fe(const rmt::GoeSample& sample, const Vec& u,
                               const Vec& v, double beta) {
  if (beta < 0.0 || beta > kInvSqrt2 + 1e-9)
    throw std::domain_error("restricted_two_slice_fe: beta out of range");
  const long n = sample.n;
  if (u.size() != static_cast<std::size_t>(n) ||
      v.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("restricted_two_slice_fe: size mismatch");
  if (n < 6)
    throw std::invalid_argument("restricted_two_slice_fe: N too small");

  // Orthonormal frame whose first two vectors span (u, v); the remaining
  // n-2 columns carry the restriction.
  std::vector<Vec> frame;
  frame.reserve(static_cast<std::size_t>(n));
  auto append = [&](Vec w, double drop_tol) {
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : frame) axpy(w, -dot(b, w), b);
    const double nrm = norm2(w);
    if (nrm < drop_tol) return false;
    scale(w, 1.0 / nrm);
    frame.push_back(std::move(w));
    return true;
  };
  if (!append(u, 1e-10) || !append(v, 1e-10))
    throw std::invalid_argument("restricted_two_slice_fe: degenerate plane");
  for (long j = 0; j < n && static_cast<long>(frame.size()) < n; ++j) {
    Vec e(static_cast<std::size_t>(n), 0.0);
    e[j] = 1.0;
    append(e, 1e-8);
  }
  if (static_cast<long>(frame.size()) != n)
    throw std::runtime_error("restricted_two_slice_fe: frame incomplete");

  const long M = n - 2;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  std::vector<Vec> sw(static_cast<std::size_t>(M));
  for (long b = 0; b < M; ++b) {
    const Vec& w = frame[b + 2];
    Vec out(static_cast<std::size_t>(n), 0.0);
    for (long i = 0; i < n; ++i) {
      double acc = 0.0;
      for (long j = 0; j < n; ++j) acc += sample.matrix[i * n + j] * w[j];
      out[i] = acc;
    }
    sw[b] = std::move(out);
  }
  std::vector<double> minor(static_cast<std::size_t>(M) * M, 0.0);
  for (long a = 0; a < M; ++a)
    for (long b = a; b < M; ++b) {
      const double val = dot(frame[a + 2], sw[b]) / sqrt_n;
      minor[a * M + b] = val;
      minor[b * M + a] = val;
    }
  Vec values;
  std::vector<double> vectors;
  rmt::eigen_symmetric(minor, M, values, vectors);

  const double ratio = static_cast<double>(M) / static_cast<double>(n);
  return ratio * no_field_saddle_fe(values, beta / ratio).value;
}

EnergyTrace mcmc_sphere(const rmt::GoeSample& sample, double beta,
                        const Vec& field_eigen, SphereChain& chain,
                        long steps, bool adapt) {
  if (steps < 1) throw std::invalid_argument("mcmc_sphere: steps < 1");
  const long n = sample.n;
  if (!field_eigen.empty() && field_eigen.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("mcmc_sphere: field dimension mismatch");
  Rng rng(chain.seed ^
          (0x9e3779b97f4a7c15ULL *
           static_cast<std::uint64_t>(chain.steps_taken + 1)));
  if (chain.state.empty()) chain.state = rng.unit_sphere_vec(n);
  if (chain.state.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("mcmc_sphere: state dimension mismatch");
  chain.state = normalized(chain.state);

  auto energy = [&](const Vec& s) {
    double e = 0.0;
    for (long i = 0; i < n; ++i) e += sample.spectrum[i] * s[i] * s[i];
    return e;
  };
  auto field_term = [&](const Vec& s) {
    return field_eigen.empty() ? 0.0 : dot(field_eigen, s);
  };

  EnergyTrace trace;
  trace.energy_per_spin.reserve(steps);
  trace.field_term.reserve(steps);

  double e = energy(chain.state);
  double f = field_term(chain.state);
  long accepted_total = 0, accepted_window = 0;
  const double dN = static_cast<double>(n);

  for (long step = 0; step < steps; ++step) {
    Vec prop = chain.state;
    const Vec g = rng.gaussian_vec(n);
    axpy(prop, chain.step_scale, g);
    prop = normalized(prop);
    const double ep = energy(prop);
    const double fp = field_term(prop);
    const double delta = dN * (beta * (ep - e) + (fp - f));
    if (delta >= 0.0 || rng.uniform() < std::exp(delta)) {
      chain.state = std::move(prop);
      e = ep;
      f = fp;
      ++accepted_total;
      ++accepted_window;
    }
    trace.energy_per_spin.push_back(e);
    trace.field_term.push_back(f);
    if (adapt && (step + 1) % 100 == 0) {
      const double rate = accepted_window / 100.0;
      if (rate < 0.25) chain.step_scale *= 0.8;
      if (rate > 0.40) chain.step_scale *= 1.25;
      chain.step_scale = std::clamp(chain.step_scale, 1e-6, 10.0);
      accepted_window = 0;
    }
  }
  chain.acceptance_rate = static_cast<double>(accepted_total) /
                          static_cast<double>(steps);
  chain.steps_taken += steps;
  return trace;
}

double thermo_integrate(const rmt::GoeSample& sample, const Vec& field_eigen,
                        const ThermoSchedule& schedule, std::uint64_t seed) {
  const Vec& grid = schedule.beta_grid;
  if (grid.empty() || grid.front() != 0.0)
    throw std::invalid_argument("thermo_integrate: grid must start at 0");
  for (std::size_t j = 1; j < grid.size(); ++j)
    if (grid[j] <= grid[j - 1])
      throw std::invalid_argument("thermo_integrate: grid must be ascending");
  if (schedule.samples_per_point < 1 || schedule.burn_in < 0)
    throw std::invalid_argument("thermo_integrate: bad schedule");
  if (sample.n < 4)
    throw std::invalid_argument("thermo_integrate: N too small");

  const double h = field_eigen.empty() ? 0.0 : norm2(field_eigen);
  const double base = (h > 0.0) ? pure_field_free_energy(sample.n, h) : 0.0;
  if (grid.size() == 1) return base;

  SphereChain chain;
  chain.seed = seed;

  Vec means(grid.size(), 0.0);
  double tau_prev = 1.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double beta = grid[j];
    const long burn =
        (schedule.burn_in > 0)
            ? schedule.burn_in
            : std::max<long>(5000, static_cast<long>(std::ceil(10.0 * tau_prev)));
    mcmc_sphere(sample, beta, field_eigen, chain, burn, true);
    const EnergyTrace trace =
        mcmc_sphere(sample, beta, field_eigen, chain, schedule.samples_per_point,
                    false);
    if (chain.acceptance_rate < 0.1 || chain.acceptance_rate > 0.6)
      std::cerr << "thermo_integrate: acceptance " << chain.acceptance_rate
                << " at beta " << beta << " outside [0.1, 0.6]\n";
    double mean = 0.0;
    for (double v : trace.energy_per_spin) mean += v;
    means[j] = mean / static_cast<double>(trace.energy_per_spin.size());
    tau_prev = integrated_autocorrelation(trace.energy_per_spin);
  }

  double integral = 0.0;
  for (std::size_t j = 1; j < grid.size(); ++j)
    integral += 0.5 * (means[j] + means[j - 1]) * (grid[j] - grid[j - 1]);
  return base + integral;
}

}  // namespace sphertap::finite_fe
