#include "sphertap/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sphertap::subspace {

namespace {

// floor/ceil of a positive analytic expression, guarded against the value
// sitting a few ulps below an exact integer (256^{3/4} = 64).
long floor_guarded(double x) { return static_cast<long>(std::floor(x + 1e-9)); }
long ceil_guarded(double x) { return static_cast<long>(std::ceil(x - 1e-9)); }

Vec apply_doubled_diagonal(const Vec& spectrum, const Vec& v) {
  Vec w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) w[i] = 2.0 * spectrum[i] * v[i];
  return w;
}

// Subtracts the projection onto the current orthonormal basis twice; the
// second pass removes the O(eps * |x|) leftovers of the first.
Vec perp_component(const std::vector<Vec>& basis, Vec x) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vec& b : basis) axpy(x, -dot(b, x), b);
  }
  return x;
}

// Orthogonalizes x against basis and appends it when the remainder is not
// numerically degenerate. Returns whether x contributed a new direction.
bool mgs_append(std::vector<Vec>& basis, Vec x) {
  x = perp_component(basis, std::move(x));
  const double nrm = norm2(x);
  if (nrm < 1e-12) return false;
  scale(x, 1.0 / nrm);
  basis.push_back(std::move(x));
  return true;
}

}  // namespace

Vec regularize_field(const Vec& field_in_eigenbasis) {
  if (field_in_eigenbasis.empty())
    throw std::invalid_argument("regularize_field: empty field");
  Vec out = field_in_eigenbasis;
  const double floor_mag = 1.0 / static_cast<double>(out.size());
  double& last = out.back();
  if (std::abs(last) < floor_mag) last = (last < 0.0) ? -floor_mag : floor_mag;
  return out;
}

InvariantSubspace build_subspace(const Vec& spectrum, const Vec& field,
                                 long N) {
  if (N < 2) throw std::invalid_argument("build_subspace: N must be >= 2");
  if (spectrum.size() != static_cast<std::size_t>(N) ||
      field.size() != static_cast<std::size_t>(N))
    throw std::invalid_argument("build_subspace: size mismatch");
  if (norm2(field) == 0.0)
    throw std::invalid_argument("build_subspace: zero field");

  InvariantSubspace sub;
  sub.n = N;
  const double dN = static_cast<double>(N);
  sub.dim = floor_guarded(std::pow(dN, 0.75));
  const double logN = std::log(dN);
  sub.V = ceil_guarded(std::sqrt(dN) * logN * logN);

  const double edge_cut = kSqrt2 - 1.0 / std::sqrt(dN);
  for (long j = 0; j < N; ++j)
    if (std::abs(spectrum[j]) >= edge_cut) sub.edge_set.push_back(j);

  const long edge_count = static_cast<long>(sub.edge_set.size());
  if (edge_count >= sub.dim)
    throw std::runtime_error(
        "build_subspace: edge set fills the dimension budget (N too small)");

  sub.v_used = std::min(sub.V, sub.dim - edge_count);

  // Normalized iterates of the doubled diagonal map, seeded by the field.
  std::vector<Vec> iterates;
  iterates.reserve(static_cast<std::size_t>(sub.v_used));
  iterates.push_back(normalized(field));
  for (long t = 1; t < sub.v_used; ++t)
    iterates.push_back(normalized(apply_doubled_diagonal(spectrum, iterates.back())));
  sub.last_iterate = iterates.back();

  sub.basis.reserve(static_cast<std::size_t>(sub.dim));
  for (Vec& it : iterates) mgs_append(sub.basis, std::move(it));
  for (long j : sub.edge_set) {
    Vec e(static_cast<std::size_t>(N), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    mgs_append(sub.basis, std::move(e));
  }

  // Pad with unused coordinate vectors, nearest the spectral edge first.
  std::vector<long> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0L);
  std::sort(order.begin(), order.end(), [&](long a, long b) {
    const double ma = std::abs(spectrum[a]);
    const double mb = std::abs(spectrum[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  for (long j : order) {
    if (static_cast<long>(sub.basis.size()) >= sub.dim) break;
    Vec e(static_cast<std::size_t>(N), 0.0);
    e[static_cast<std::size_t>(j)] = 1.0;
    mgs_append(sub.basis, std::move(e));
  }
  if (static_cast<long>(sub.basis.size()) != sub.dim)
    throw std::runtime_error("build_subspace: padding failed to reach budget");

  sub.residual = invariance_residual(sub, 1.0, spectrum, field);
  return sub;
}

double invariance_residual(const InvariantSubspace& sub, double beta,
                           const Vec& spectrum, const Vec& field) {
  if (spectrum.size() != static_cast<std::size_t>(sub.n) ||
      field.size() != static_cast<std::size_t>(sub.n))
    throw std::invalid_argument("invariance_residual: size mismatch");
  if (beta < 0.0)
    throw std::invalid_argument("invariance_residual: beta must be >= 0");

  Vec pushed = apply_doubled_diagonal(spectrum, sub.last_iterate);
  const double gain = norm2(pushed);
  double image_leak = 0.0;
  if (gain > 0.0) {
    scale(pushed, 1.0 / gain);
    image_leak = norm2(perp_component(sub.basis, std::move(pushed)));
  }
  const double field_defect = norm2(perp_component(sub.basis, field));
  return beta * gain * image_leak + field_defect;
}

bool iterate_projection_bound_check(const Vec& spectrum_classical,
                                    const Vec& v, long k, double eps) {
  const std::size_t n = spectrum_classical.size();
  if (v.size() != n || n == 0)
    throw std::invalid_argument("iterate_projection_bound_check: size mismatch");
  if (k < 1)
    throw std::domain_error("iterate_projection_bound_check: k must be >= 1");
  if (eps <= 0.0)
    throw std::domain_error("iterate_projection_bound_check: eps must be > 0");
  const double top_coord = v.back();
  if (top_coord == 0.0)
    throw std::domain_error(
        "iterate_projection_bound_check: v must have nonzero top component");

  // The ratio |P_bulk D^k v| / |D^k v| is scale invariant, so renormalize
  // after every application to keep k ~ 1000 in range.
  Vec w = normalized(v);
  for (long t = 0; t < k; ++t)
    w = normalized(apply_doubled_diagonal(spectrum_classical, w));

  const double bulk_cut = kSqrt2 - eps;
  double bulk_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(spectrum_classical[i]) < bulk_cut) bulk_sq += w[i] * w[i];
  const double lhs = std::sqrt(bulk_sq);

  const double base = std::max(0.0, 1.0 - eps / kSqrt2);
  const double rhs = std::sqrt(static_cast<double>(n)) * norm2(v) /
                     std::abs(top_coord) * std::pow(base, static_cast<double>(k));
  return lhs <= rhs;
}

}  // namespace sphertap::subspace
