#pragma once

// Closed-form asymptotic quantities of the 2-spin spherical model:
// semicircle law and its quantiles, Stieltjes and log-potential transforms,
// the high-temperature free energy, and the two one-dimensional variational
// principles (TAP radial functional B and the Parisi-type functional P)
// whose optima coincide for every (beta, h).

#include <vector>

#include "sphertap/common.hpp"

namespace sphertap::analytic {

struct AsymptoticParams {
  double beta;
  double h;
  // beta >= 0 and h >= 0; operations that need beta > 0 enforce it.
  AsymptoticParams(double beta_in, double h_in);
};

struct RadialCandidate {
  double q = 0.0;
  double value = 0.0;
  bool constraint_active = false;
};

// Semicircle density (1/pi)sqrt(2-x^2) on [-sqrt2, sqrt2], 0 outside.
double mu_density(double x);

// Closed-form CDF of mu_density; increasing from 0 at -sqrt2 to 1 at sqrt2.
double semicircle_cdf(double x);

// u-quantile of the semicircle law, bisection to absolute tolerance 1e-12.
double classical_location(double u);

// theta_{i/n} for i = 1..n, ascending; theta_{n/n} = sqrt2 exactly.
std::vector<double> classical_spectrum(int n);

// g(lambda) = lambda - sqrt(lambda^2 - 2) for lambda >= sqrt2.
double stieltjes_g(double lambda);

// h(lambda) = lambda^2/2 - 1/2 - lambda sqrt(lambda^2-2)/2
//             + log((lambda + sqrt(lambda^2-2))/2); h' = g.
double log_potential_h(double lambda);

// Unique lambda >= sqrt2 with g(lambda) = 2 beta, for beta in (0, 1/sqrt2].
double lambda_of_beta(double beta);

// High-temperature free energy beta^2/2 on [0, 1/sqrt2].
double limiting_free_energy(double beta);

// The same quantity assembled from the spectral transforms:
// beta*lambda(beta) - 1/2 - log(2 beta)/2 - h(lambda(beta))/2.
double limiting_free_energy_spectral(double beta);

// B(q) = sqrt(h^2 q + 2 beta^2 q^2) + log(1-q)/2 + (beta^2/2)(1-q)^2.
double tap_functional_B(double q, const AsymptoticParams& p);

// P(q) = h^2(1-q)/2 + q/(2(1-q)) + log(1-q)/2 + beta^2(1-q^2)/2.
double parisi_functional_P(double q, const AsymptoticParams& p);

// sup of B over the closed Plefka-feasible set {q in [0,1): beta(1-q) <= 1/sqrt2}.
// Dense pre-scan (1e4 points) + golden-section refinement to 1e-10 in q.
RadialCandidate solve_tap_variational(const AsymptoticParams& p);

// inf of P over [0, 1-1e-12], same search protocol.
RadialCandidate solve_parisi(const AsymptoticParams& p);

}  // namespace sphertap::analytic
