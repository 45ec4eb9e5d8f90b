#pragma once

#include <vector>

#include "sphertap/common.hpp"

namespace sphertap::subspace {

// Low-dimensional subspace spanned by the normalized iterates of the
// doubled diagonal map applied to the regularized field, together with the
// edge coordinate vectors, padded to dimension floor(N^{3/4}).
//
// V is the nominal Krylov depth ceil(sqrt(N) log^2 N); v_used <= V iterates
// fit under the dimension budget at desk sizes. last_iterate is the final
// iterate inside the span; pushing it once more through the map measures
// the only leak the construction permits.
struct InvariantSubspace {
  long n = 0;
  long dim = 0;
  long V = 0;
  long v_used = 0;
  std::vector<long> edge_set;
  std::vector<Vec> basis;
  Vec last_iterate;
  double residual = 0.0;
};

// Copies the field, raising the magnitude of the last coordinate to 1/N
// when it falls below that; |output - input| <= 1/N.
Vec regularize_field(const Vec& field_in_eigenbasis);

// spectrum holds the N locations ascending (classical or empirical); field
// must be regularized. Throws std::runtime_error when the edge set alone
// exceeds the dimension budget.
InvariantSubspace build_subspace(const Vec& spectrum, const Vec& field,
                                 long N);

// beta * |D last_iterate| * |perp of its direction| + |perp of field|,
// where D = diag(2 theta_i) is rebuilt from the supplied spectrum. The
// first term bounds the image leak of the unit ball of the subspace under
// beta D; the second is the field's own defect.
double invariance_residual(const InvariantSubspace& sub, double beta,
                           const Vec& spectrum, const Vec& field);

// Verifies |P_bulk D^k v| / |D^k v| <= sqrt(N) |v| / |v_N| (1 - eps/sqrt2)^k
// with bulk = {i : |theta_{i/N}| < sqrt2 - eps}; k >= 1.
bool iterate_projection_bound_check(const Vec& spectrum_classical,
                                    const Vec& v, long k, double eps);

}  // namespace sphertap::subspace
