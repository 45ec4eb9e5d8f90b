#include "sphertap/tap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "sphertap/analytic.hpp"
#include "sphertap/rng.hpp"

namespace sphertap::tap {

namespace {

constexpr double kRadiusCeiling = 1.0 - 1e-9;

double squared_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// Euclidean projection onto the annulus r_min <= |m| <= r_max is radial
// rescaling; keep_dir supplies a direction when the input is the origin.
void project_annulus(Vec& m, double r_min, double r_max, const Vec& keep_dir) {
  double r = std::sqrt(squared_norm(m));
  if (r < 1e-300) {
    m = keep_dir;
    scale(m, r_min > 0.0 ? r_min : 1e-8);
    r = std::sqrt(squared_norm(m));
    if (r < 1e-300) return;
  }
  if (r > r_max) {
    scale(m, r_max / r);
  } else if (r < r_min) {
    scale(m, r_min / r);
  }
}

// Gradient with the radial component removed when it pushes against an
// active radius bound; its norm is the stationarity measure on the annulus.
double projected_residual(const Vec& m, const Vec& g, double r_min,
                          double r_max) {
  const double r = std::sqrt(squared_norm(m));
  if (r < 1e-300) return std::sqrt(squared_norm(g));
  double radial = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) radial += g[i] * m[i];
  radial /= r;
  const bool outer_block = r >= r_max * (1.0 - 1e-12) && radial > 0.0;
  const bool inner_block = r_min > 0.0 && r <= r_min * (1.0 + 1e-12) &&
                           radial < 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double gi = g[i];
    if (outer_block || inner_block) gi -= radial * m[i] / r;
    s += gi * gi;
  }
  return std::sqrt(s);
}

struct AscentResult {
  Vec m;
  double value = 0.0;
  double residual = 0.0;
};

template <class ValueFn, class GradFn>
AscentResult ascend(Vec m, ValueFn&& value_fn, GradFn&& grad_fn, double r_min,
                    double r_max, long max_iter, double grad_target) {
  const Vec dir0 = m;
  project_annulus(m, r_min, r_max, dir0);
  double val = value_fn(m);
  double step = 0.0;
  AscentResult out;
  for (long iter = 0; iter < max_iter; ++iter) {
    const Vec g = grad_fn(m);
    const double res = projected_residual(m, g, r_min, r_max);
    if (res <= grad_target) {
      out.m = std::move(m);
      out.value = val;
      out.residual = res;
      return out;
    }
    if (step == 0.0) step = 0.1 / (std::sqrt(squared_norm(g)) + 1e-300);
    bool accepted = false;
    for (int bt = 0; bt < 70; ++bt) {
      Vec cand = m;
      axpy(cand, step, g);
      project_annulus(cand, r_min, r_max, m);
      double moved = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double d = cand[i] - m[i];
        moved += d * d;
      }
      if (moved == 0.0) {
        step *= 0.5;
        continue;
      }
      const double cval = value_fn(cand);
      if (cval >= val + 1e-4 * moved / step) {
        m = std::move(cand);
        val = cval;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step *= 2.0;
  }
  const Vec g = grad_fn(m);
  out.residual = projected_residual(m, g, r_min, r_max);
  out.value = val;
  out.m = std::move(m);
  return out;
}

Vec to_eigenbasis(const rmt::GoeSample& sample, const Vec& v) {
  const long n = sample.n;
  Vec out(n, 0.0);
  for (long j = 0; j < n; ++j) {
    double acc = 0.0;
    for (long k = 0; k < n; ++k) acc += sample.basis[k * n + j] * v[k];
    out[j] = acc;
  }
  return out;
}

Vec from_eigenbasis(const rmt::GoeSample& sample, const Vec& v) {
  const long n = sample.n;
  Vec out(n, 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = 0; j < n; ++j) acc += sample.basis[i * n + j] * v[j];
    out[i] = acc;
  }
  return out;
}

double onsager_and_entropy(double n, double beta, double q) {
  return 0.5 * n * std::log1p(-q) + 0.5 * n * beta * beta * (1.0 - q) * (1.0 - q);
}

}  // namespace

double h_tap(const Vec& m, double beta, const rmt::FieldVector& field,
             const rmt::GoeSample& sample) {
  const double q = squared_norm(m);
  if (q >= 1.0) throw std::domain_error("h_tap: |m| must be below 1");
  const double n = static_cast<double>(sample.n);
  return beta * rmt::hamiltonian(sample, m) +
         n * dot(m, field.components) + onsager_and_entropy(n, beta, q);
}

Vec grad_h_tap(const Vec& m, double beta, const rmt::FieldVector& field,
               const rmt::GoeSample& sample) {
  const double q = squared_norm(m);
  if (q >= 1.0) throw std::domain_error("grad_h_tap: |m| must be below 1");
  const double n = static_cast<double>(sample.n);
  Vec g = rmt::hamiltonian_grad(sample, m);
  const double radial = 1.0 / (1.0 - q) + 2.0 * beta * beta * (1.0 - q);
  for (long i = 0; i < sample.n; ++i)
    g[i] = beta * g[i] + n * field.components[i] - n * m[i] * radial;
  return g;
}

rmt::FieldVector effective_field(const Vec& m, double beta,
                                 const rmt::FieldVector& field,
                                 const rmt::GoeSample& sample) {
  Vec g = rmt::hamiltonian_grad(sample, m);
  const double inv_n = 1.0 / static_cast<double>(sample.n);
  for (long i = 0; i < sample.n; ++i)
    g[i] = beta * g[i] * inv_n + field.components[i];
  return rmt::make_field(std::move(g));
}

bool check_plefka(const Vec& m, double beta) {
  return beta * (1.0 - squared_norm(m)) <= kInvSqrt2 + 1e-12;
}

TapPoint optimize_tap(double beta, const rmt::FieldVector& field,
                      const rmt::GoeSample& sample, std::uint64_t seed) {
  if (!(beta > 0.0)) throw std::domain_error("optimize_tap: beta must be > 0");
  const long n = sample.n;
  if (static_cast<long>(field.components.size()) != n)
    throw std::invalid_argument("optimize_tap: field dimension mismatch");
  const Vec htilde = to_eigenbasis(sample, field.components);
  const Vec& theta = sample.spectrum;
  const double nn = static_cast<double>(n);

  const double r_min = beta > kInvSqrt2
                           ? std::sqrt(1.0 - 1.0 / (kSqrt2 * beta))
                           : 0.0;
  const double q_star =
      analytic::solve_tap_variational({beta, field.magnitude}).q;
  const double r_star = std::sqrt(std::max(q_star, 0.0));

  auto value_fn = [&](const Vec& m) {
    const double q = squared_norm(m);
    double quad = 0.0, lin = 0.0;
    for (long i = 0; i < n; ++i) {
      quad += theta[i] * m[i] * m[i];
      lin += htilde[i] * m[i];
    }
    return beta * nn * quad + nn * lin + onsager_and_entropy(nn, beta, q);
  };
  auto grad_fn = [&](const Vec& m) {
    const double q = squared_norm(m);
    const double radial = 1.0 / (1.0 - q) + 2.0 * beta * beta * (1.0 - q);
    Vec g(n);
    for (long i = 0; i < n; ++i)
      g[i] = 2.0 * beta * nn * theta[i] * m[i] + nn * htilde[i] -
             nn * m[i] * radial;
    return g;
  };

  Rng rng(seed);
  const double target = 1e-6 * nn;
  const double acceptable = 1e-4 * nn;
  bool have_best = false, any_converged = false;
  AscentResult best;
  double best_residual_seen = 1e300;
  for (int t = 0; t < 20; ++t) {
    const double radius =
        t < 5 ? 0.08 + 0.04 * t
              : std::clamp(r_star - 0.1 + 0.2 * (t - 5) / 14.0, 0.05, 0.98);
    Vec m0 = rng.unit_sphere_vec(n);
    scale(m0, std::max(radius, r_min > 0.0 ? r_min : radius));
    auto res = ascend(std::move(m0), value_fn, grad_fn, r_min, kRadiusCeiling,
                      100000, target);
    best_residual_seen = std::min(best_residual_seen, res.residual);
    if (res.residual <= acceptable) {
      any_converged = true;
      if (!have_best || res.value > best.value) {
        best = std::move(res);
        have_best = true;
      }
    }
  }
  if (!any_converged)
    throw std::runtime_error(
        "optimize_tap: no restart reached the gradient target; best residual " +
        std::to_string(best_residual_seen));

  TapPoint point;
  point.m = from_eigenbasis(sample, best.m);
  point.beta = beta;
  point.field = field;
  point.value = h_tap(point.m, beta, field, sample);
  point.plefka_beta = beta * (1.0 - squared_norm(point.m));
  return point;
}

double radial_reduction_check(double beta, double h,
                              const rmt::GoeSample& sample) {
  if (h < 0.0) throw std::domain_error("radial_reduction_check: h < 0");
  Rng rng(sample.seed ^ 0x51e2d1ec7104f00dULL);
  Vec dir = rng.unit_sphere_vec(sample.n);
  scale(dir, h);
  const auto field = rmt::make_field(std::move(dir));
  const auto point = optimize_tap(beta, field, sample, sample.seed);
  const auto asym = analytic::solve_tap_variational({beta, h});
  return std::abs(point.value / static_cast<double>(sample.n) - asym.value);
}

double modified_tap_energy(const Vec& m, double beta,
                           const rmt::FieldVector& field_diag,
                           const coarse::CoarseGrid& grid) {
  const double q = squared_norm(m);
  if (q >= 1.0) throw std::domain_error("modified_tap_energy: |m| >= 1");
  const long n = static_cast<long>(m.size());
  const double nn = static_cast<double>(n);
  double quad = 0.0, lin = 0.0;
  for (long i = 0; i < n; ++i) {
    const double loc =
        analytic::classical_location(static_cast<double>(i + 1) / nn);
    quad += loc * m[i] * m[i];
    lin += field_diag.components[i] * m[i];
  }
  return beta * nn * quad + nn * lin + 0.5 * nn * std::log1p(-q) +
         nn * coarse::free_energy_F_K(grid, beta * (1.0 - q));
}

Vec modified_tap_gradient(const Vec& m, double beta,
                          const rmt::FieldVector& field_diag,
                          const coarse::CoarseGrid& grid) {
  const double q = squared_norm(m);
  if (q >= 1.0) throw std::domain_error("modified_tap_gradient: |m| >= 1");
  const long n = static_cast<long>(m.size());
  const double nn = static_cast<double>(n);
  const double lam = coarse::solve_lambda_K(grid, beta * (1.0 - q));
  Vec g(n);
  for (long i = 0; i < n; ++i) {
    const double loc =
        analytic::classical_location(static_cast<double>(i + 1) / nn);
    g[i] = 2.0 * beta * nn * loc * m[i] + nn * field_diag.components[i] -
           2.0 * beta * nn * lam * m[i];
  }
  return g;
}

ModifiedTapPoint optimize_modified_tap(long n, double beta,
                                       const rmt::FieldVector& field_diag,
                                       const coarse::CoarseGrid& grid,
                                       std::uint64_t seed) {
  if (!(beta > 0.0))
    throw std::domain_error("optimize_modified_tap: beta must be > 0");
  if (static_cast<long>(field_diag.components.size()) != n)
    throw std::invalid_argument("optimize_modified_tap: dimension mismatch");
  const double nn = static_cast<double>(n);
  Vec locs(n);
  for (long i = 0; i < n; ++i)
    locs[i] = analytic::classical_location(static_cast<double>(i + 1) / nn);

  auto value_fn = [&](const Vec& m) {
    const double q = squared_norm(m);
    double quad = 0.0, lin = 0.0;
    for (long i = 0; i < n; ++i) {
      quad += locs[i] * m[i] * m[i];
      lin += field_diag.components[i] * m[i];
    }
    return beta * nn * quad + nn * lin + 0.5 * nn * std::log1p(-q) +
           nn * coarse::free_energy_F_K(grid, beta * (1.0 - q));
  };
  auto grad_fn = [&](const Vec& m) {
    const double q = squared_norm(m);
    const double lam = coarse::solve_lambda_K(grid, beta * (1.0 - q));
    Vec g(n);
    for (long i = 0; i < n; ++i)
      g[i] = 2.0 * beta * nn * locs[i] * m[i] +
             nn * field_diag.components[i] - 2.0 * beta * nn * lam * m[i];
    return g;
  };

  Rng rng(seed);
  const double target = 1e-6 * nn;
  ModifiedTapPoint best;
  bool have_best = false;
  for (int t = 0; t < 8; ++t) {
    const double radius = 0.1 + 0.1 * t;
    Vec m0 = rng.unit_sphere_vec(n);
    scale(m0, radius);
    auto res =
        ascend(std::move(m0), value_fn, grad_fn, 0.0, kRadiusCeiling, 100000,
               target);
    if (!have_best || res.value > best.value) {
      best.m = std::move(res.m);
      best.value = res.value;
      best.grad_norm = res.residual;
      have_best = true;
    }
  }
  return best;
}

HessianDiagnostic modified_tap_local_max_diagnostic(
    const Vec& m, double beta, const coarse::CoarseGrid& grid,
    const rmt::GoeSample& sample, const rmt::FieldVector& field_diag) {
  const long n = sample.n;
  if (static_cast<long>(m.size()) != n)
    throw std::invalid_argument(
        "modified_tap_local_max_diagnostic: dimension mismatch");
  const Vec g = modified_tap_gradient(m, beta, field_diag, grid);
  if (std::sqrt(squared_norm(g)) > 1e-3 * static_cast<double>(n))
    throw std::domain_error(
        "modified_tap_local_max_diagnostic: point is not near-critical");

  const double beta_m = beta * (1.0 - squared_norm(m));
  const double lam = coarse::solve_lambda_K(grid, beta_m);
  HessianDiagnostic diag;
  diag.second_eigenvalue =
      analytic::classical_location(static_cast<double>(n - 1) / n) - lam;
  const double eps = coarse::plefka_threshold(grid);
  diag.plefka_implied =
      diag.second_eigenvalue <= 0.0 && lam >= kSqrt2 - eps;
  return diag;
}

GroundState ground_state_lagrange(const rmt::GoeSample& sample,
                                  const rmt::FieldVector& field_in_eigenbasis,
                                  double beta) {
  if (!(beta > 0.0))
    throw std::domain_error("ground_state_lagrange: beta must be > 0");
  const long n = sample.n;
  const Vec& h = field_in_eigenbasis.components;
  if (static_cast<long>(h.size()) != n)
    throw std::invalid_argument("ground_state_lagrange: dimension mismatch");
  const Vec& theta = sample.spectrum;
  const double top = theta[n - 1];

  auto pure_top = [&](bool fallback) {
    GroundState gs;
    gs.lambda_star = top;
    gs.sigma_star.assign(n, 0.0);
    gs.sigma_star[n - 1] = 1.0;
    gs.value = beta * top + h[n - 1];
    gs.field_fallback = fallback;
    return gs;
  };
  if (field_in_eigenbasis.magnitude <= 1e-14) return pure_top(false);

  auto sum_sq = [&](double lam) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) {
      const double sig = h[i] / (2.0 * beta * (lam - theta[i]));
      s += sig * sig;
    }
    return s;
  };
  double lo = top + 1e-12, hi = top + 1e3;
  if (sum_sq(lo) < 1.0) return pure_top(true);
  if (sum_sq(hi) >= 1.0)
    throw std::runtime_error(
        "ground_state_lagrange: multiplier above the search bracket");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sum_sq(mid) >= 1.0 ? lo : hi) = mid;
  }
  const double lam = 0.5 * (lo + hi);

  GroundState gs;
  gs.lambda_star = lam;
  gs.sigma_star.resize(n);
  for (long i = 0; i < n; ++i)
    gs.sigma_star[i] = h[i] / (2.0 * beta * (lam - theta[i]));
  const double nrm = std::sqrt(squared_norm(gs.sigma_star));
  for (double& x : gs.sigma_star) x /= nrm;
  double quad = 0.0, lin = 0.0;
  for (long i = 0; i < n; ++i) {
    quad += theta[i] * gs.sigma_star[i] * gs.sigma_star[i];
    lin += h[i] * gs.sigma_star[i];
  }
  gs.value = beta * quad + lin;
  gs.field_fallback = false;
  return gs;
}

}  // namespace sphertap::tap
