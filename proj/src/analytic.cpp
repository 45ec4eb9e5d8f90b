#include "sphertap/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace sphertap::analytic {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kQMax = 1.0 - 1e-12;  // clip to avoid the log singularity

double sqrt_lambda2_minus_2(double lambda) {
  // Factored form keeps full precision at the spectral edge, where
  // lambda*lambda - 2.0 would round to a spurious positive value.
  return std::sqrt(std::max((lambda - kSqrt2) * (lambda + kSqrt2), 0.0));
}

struct ScanResult {
  double q;
  double value;
};

// Dense pre-scan on [lo, hi] followed by golden-section on the bracketing
// cell. When the optimum is flat to cubic order at a boundary (B at the
// Plefka edge with h = 0), values within a few ulps tie; the boundary point
// wins ties so the reported q is exact there.
ScanResult optimize_1d(const std::function<double(double)>& f, double lo,
                       double hi, bool maximize) {
  const int kGrid = 10000;
  const double sgn = maximize ? 1.0 : -1.0;
  int best = 0;
  double best_val = sgn * f(lo);
  for (int i = 1; i <= kGrid; ++i) {
    const double q = lo + (hi - lo) * i / kGrid;
    const double v = sgn * f(q);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / kGrid;
  double b = lo + (hi - lo) * std::min(best + 1, kGrid) / kGrid;
  const double gr = 0.6180339887498949;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = sgn * f(c), fd = sgn * f(d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = sgn * f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = sgn * f(d);
    }
  }
  double q = 0.5 * (a + b);
  double val = sgn * f(q);
  // Snap to the domain boundary on a tie (flat-at-boundary optimum).
  const double flo = sgn * f(lo);
  if (flo >= val - 4e-16 * std::max(1.0, std::abs(val))) {
    q = lo;
    val = flo;
  }
  return {q, sgn * val};
}

}  // namespace

AsymptoticParams::AsymptoticParams(double beta_in, double h_in)
    : beta(beta_in), h(h_in) {
  if (!(beta >= 0.0)) throw std::domain_error("AsymptoticParams: beta < 0");
  if (!(h >= 0.0)) throw std::domain_error("AsymptoticParams: h < 0");
}

double mu_density(double x) {
  if (x <= -kSqrt2 || x >= kSqrt2) return 0.0;
  return std::sqrt(2.0 - x * x) / kPi;
}

double semicircle_cdf(double x) {
  if (x <= -kSqrt2) return 0.0;
  if (x >= kSqrt2) return 1.0;
  return 0.5 + (x * std::sqrt(2.0 - x * x)) / (2.0 * kPi) +
         std::asin(x * kInvSqrt2) / kPi;
}

double classical_location(double u) {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::domain_error("classical_location: u outside [0,1]");
  if (u == 0.0) return -kSqrt2;
  if (u == 1.0) return kSqrt2;
  double lo = -kSqrt2, hi = kSqrt2;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (semicircle_cdf(mid) < u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> classical_spectrum(int n) {
  if (n < 1) throw std::domain_error("classical_spectrum: n < 1");
  std::vector<double> theta(n);
  for (int i = 1; i <= n; ++i)
    theta[i - 1] = classical_location(static_cast<double>(i) / n);
  return theta;
}

double stieltjes_g(double lambda) {
  if (lambda < kSqrt2) throw std::domain_error("stieltjes_g: lambda < sqrt2");
  return lambda - sqrt_lambda2_minus_2(lambda);
}

double log_potential_h(double lambda) {
  if (lambda < kSqrt2)
    throw std::domain_error("log_potential_h: lambda < sqrt2");
  const double s = sqrt_lambda2_minus_2(lambda);
  return 0.5 * lambda * lambda - 0.5 - 0.5 * lambda * s +
         std::log(0.5 * (lambda + s));
}

double lambda_of_beta(double beta) {
  if (!(beta > 0.0 && beta <= kInvSqrt2))
    throw std::domain_error("lambda_of_beta: beta outside (0, 1/sqrt2]");
  if (beta == kInvSqrt2) return kSqrt2;
  const double t = kSqrt2 * beta;
  return kInvSqrt2 * (t + 1.0 / t);
}

double limiting_free_energy(double beta) {
  if (!(beta >= 0.0 && beta <= kInvSqrt2))
    throw std::domain_error("limiting_free_energy: beta outside [0, 1/sqrt2]");
  return 0.5 * beta * beta;
}

double limiting_free_energy_spectral(double beta) {
  const double lambda = lambda_of_beta(beta);
  return beta * lambda - 0.5 - 0.5 * std::log(2.0 * beta) -
         0.5 * log_potential_h(lambda);
}

double tap_functional_B(double q, const AsymptoticParams& p) {
  if (!(q >= 0.0 && q < 1.0))
    throw std::domain_error("tap_functional_B: q outside [0,1)");
  const double b2 = p.beta * p.beta;
  return std::sqrt(p.h * p.h * q + 2.0 * b2 * q * q) +
         0.5 * std::log1p(-q) + 0.5 * b2 * (1.0 - q) * (1.0 - q);
}

double parisi_functional_P(double q, const AsymptoticParams& p) {
  if (!(q >= 0.0 && q < 1.0))
    throw std::domain_error("parisi_functional_P: q outside [0,1)");
  const double b2 = p.beta * p.beta;
  return 0.5 * p.h * p.h * (1.0 - q) + 0.5 * q / (1.0 - q) +
         0.5 * std::log1p(-q) + 0.5 * b2 * (1.0 - q * q);
}

RadialCandidate solve_tap_variational(const AsymptoticParams& p) {
  if (!(p.beta > 0.0))
    throw std::domain_error("solve_tap_variational: beta <= 0");
  const double q_min = std::max(0.0, 1.0 - 1.0 / (kSqrt2 * p.beta));
  const auto f = [&p](double q) { return tap_functional_B(q, p); };
  const ScanResult r = optimize_1d(f, q_min, kQMax, /*maximize=*/true);
  RadialCandidate out;
  out.q = r.q;
  out.value = r.value;
  out.constraint_active = (q_min > 0.0) && (std::abs(r.q - q_min) <= 1e-8);
  return out;
}

RadialCandidate solve_parisi(const AsymptoticParams& p) {
  if (!(p.beta >= 0.0)) throw std::domain_error("solve_parisi: beta < 0");
  if (p.beta == 0.0 && p.h == 0.0)
    throw std::domain_error("solve_parisi: beta and h both zero");
  const auto f = [&p](double q) { return parisi_functional_P(q, p); };
  const ScanResult r = optimize_1d(f, 0.0, kQMax, /*maximize=*/false);
  RadialCandidate out;
  out.q = r.q;
  out.value = r.value;
  out.constraint_active = false;
  return out;
}

}  // namespace sphertap::analytic
