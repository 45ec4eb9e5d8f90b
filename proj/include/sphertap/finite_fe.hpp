#pragma once

#include <cstdint>
#include <vector>

#include "sphertap/coarse.hpp"
#include "sphertap/common.hpp"
#include "sphertap/rmt.hpp"

namespace sphertap::finite_fe {

// Metropolis walker on the unit sphere, tracked in the eigenbasis. The
// state is renormalized every step; step_scale is the proposal radius,
// adapted only when a call asks for it and frozen otherwise.
struct SphereChain {
  Vec state;
  double step_scale = 0.25;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  long steps_taken = 0;
};

// Ascending inverse-temperature grid starting at 0 for thermodynamic
// integration. burn_in = 0 selects the automatic heuristic (ten times the
// integrated autocorrelation estimate, never below 5000 steps).
struct ThermoSchedule {
  Vec beta_grid;
  long samples_per_point = 20000;
  long burn_in = 0;
};

// Laplace evaluation of the radial sphere integral: t_star solves
// (1/N) sum 1/(2(t - beta theta_i)) = 1 beyond the top pole; value is the
// leading order, correction the crude second-order report of size log N/N.
struct SaddlePoint {
  double t_star = 0.0;
  double value = 0.0;
  double correction = 0.0;
};

// Per-step records of H_N(sigma)/N and sigma . h_N.
struct EnergyTrace {
  Vec energy_per_spin;
  Vec field_term;
};

// Density of sigma . v for a fixed unit v under the uniform sphere measure:
// Gamma(N/2) / (sqrt(pi) Gamma((N-1)/2)) (1 - x^2)^{(N-3)/2} on (-1, 1).
double inner_product_density(double x, long N);

// sigma_[k]^2 = sum of sigma_i^2 over coordinates whose spectrum value
// falls in block k; nonnegative, sums to 1.
Vec block_norms(const Vec& sigma, const coarse::CoarseGrid& grid,
                const Vec& spectrum);

// Samples num_samples normalized Gaussian vectors, compares first and
// second empirical moments of the block norms against the Dirichlet
// (|I_1|/2, ..., |I_K|/2) closed forms, and returns the largest |z|.
double dirichlet_moment_check(long N, const coarse::CoarseGrid& grid,
                              long num_samples, std::uint64_t seed);

// (1/N) log integral of inner_product_density(x, N) e^{N h x} dx by
// peak-shifted adaptive quadrature.
double pure_field_free_energy(long N, double h);

// (1/N) log E[exp(N beta sum theta_i sigma_i^2)] over the uniform sphere
// measure. Throws when the saddle collapses onto the top pole (condensed
// regime, refused by design).
SaddlePoint no_field_saddle_fe(const Vec& spectrum, double beta);

// Free energy of the model restricted to the orthogonal complement of
// span(u, v), via the (N-2)-minor spectrum and the saddle evaluator with
// the sphere dimension rescaled.
double restricted_two_slice_fe(const rmt::GoeSample& sample, const Vec& u,
                               const Vec& v, double beta);

// Metropolis chain for the Gibbs weight exp(beta H_N + N sigma . h) in the
// eigenbasis; field_eigen is h expressed in sample's eigenbasis. Proposal
// sigma' = normalize(sigma + step_scale * gaussian); adapt = true retunes
// step_scale toward acceptance in [0.25, 0.40].
EnergyTrace mcmc_sphere(const rmt::GoeSample& sample, double beta,
                        const Vec& field_eigen, SphereChain& chain,
                        long steps, bool adapt = false);

// F_N(beta_final, h) = quadrature base F_N(0, |h|) plus the trapezoid of
// the equilibrium means of H_N/N over the schedule, chains warm-started
// along the ascending grid. Warns on stderr when an acceptance rate
// leaves [0.1, 0.6].
double thermo_integrate(const rmt::GoeSample& sample, const Vec& field_eigen,
                        const ThermoSchedule& schedule, std::uint64_t seed);

}  // namespace sphertap::finite_fe
