#pragma once

#include <cstdint>

#include "sphertap/coarse.hpp"
#include "sphertap/common.hpp"
#include "sphertap/rmt.hpp"

namespace sphertap::tap {

// Magnetization with its variational value and effective temperature.
struct TapPoint {
  Vec m;
  double beta = 0.0;
  rmt::FieldVector field;
  double value = 0.0;
  double plefka_beta = 0.0;
};

// Constrained spherical maximizer found via the Lagrange multiplier.
// sigma_star lives in the eigenbasis; field_fallback marks the degenerate
// branch where the multiplier equation had no root and the top eigenvector
// was returned instead.
struct GroundState {
  double lambda_star = 0.0;
  Vec sigma_star;
  double value = 0.0;
  bool field_fallback = false;
};

double h_tap(const Vec& m, double beta, const rmt::FieldVector& field,
             const rmt::GoeSample& sample);

Vec grad_h_tap(const Vec& m, double beta, const rmt::FieldVector& field,
               const rmt::GoeSample& sample);

// Recentred field h^m = (beta/N) grad H(m) + h.
rmt::FieldVector effective_field(const Vec& m, double beta,
                                 const rmt::FieldVector& field,
                                 const rmt::GoeSample& sample);

bool check_plefka(const Vec& m, double beta);

// Projected gradient ascent with backtracking over 20 seeded restarts.
// Throws std::runtime_error when no restart reaches the gradient target.
TapPoint optimize_tap(double beta, const rmt::FieldVector& field,
                      const rmt::GoeSample& sample, std::uint64_t seed);

// |optimize_tap value per spin - asymptotic 1-D value| for |h_N| = h along
// a seeded direction.
double radial_reduction_check(double beta, double h,
                              const rmt::GoeSample& sample);

// Coarse-grained variant of the energy on the deterministic diagonal model
// with entries theta_{i/N}: the quartic term is replaced by the grid free
// energy at beta (1-|m|^2). field is given in the diagonal basis.
double modified_tap_energy(const Vec& m, double beta,
                           const rmt::FieldVector& field_diag,
                           const coarse::CoarseGrid& grid);

Vec modified_tap_gradient(const Vec& m, double beta,
                          const rmt::FieldVector& field_diag,
                          const coarse::CoarseGrid& grid);

struct ModifiedTapPoint {
  Vec m;
  double value = 0.0;
  double grad_norm = 0.0;
};

// Unconstrained (|m| < 1 only) ascent on the coarse-grained energy.
ModifiedTapPoint optimize_modified_tap(long n, double beta,
                                       const rmt::FieldVector& field_diag,
                                       const coarse::CoarseGrid& grid,
                                       std::uint64_t seed);

struct HessianDiagnostic {
  double second_eigenvalue = 0.0;
  bool plefka_implied = false;
};

// At a near-critical point of the coarse-grained energy, the shifted
// curvature matrix is diagonal with entries theta_{i/N} - lambda_K(beta(m)),
// so its second-largest eigenvalue being nonpositive forces lambda_K(beta(m))
// above the next-to-top location and hence beta(m) below the critical
// temperature up to the grid threshold.
HessianDiagnostic modified_tap_local_max_diagnostic(
    const Vec& m, double beta, const coarse::CoarseGrid& grid,
    const rmt::GoeSample& sample, const rmt::FieldVector& field_diag);

// sigma_i proportional to h_i/(lambda - theta_i) with the multiplier chosen
// so sigma is a unit vector; field given in the eigenbasis.
GroundState ground_state_lagrange(const rmt::GoeSample& sample,
                                  const rmt::FieldVector& field_in_eigenbasis,
                                  double beta);

}  // namespace sphertap::tap
