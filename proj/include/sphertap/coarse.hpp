#pragma once

// Coarse-grained spectral free energy: the K-block partition of the
// semicircle support, its Stieltjes-type transform g_K, the Lagrange
// multiplier lambda_K, the free energy F_K, an independent mirror-descent
// solver for the underlying simplex problem, and the Plefka threshold.

#include <vector>

#include "sphertap/common.hpp"

namespace sphertap::coarse {

struct CoarseGrid {
  int K = 1;        // requested block count (grid spacing 2*sqrt2/K)
  Vec x;            // surviving grid points, x.front() = -sqrt2
  Vec mu;           // weights, all positive, sum to 1
  long N = 0;       // counting resolution

  int blocks() const { return static_cast<int>(x.size()); }
};

struct SimplexWeights {
  Vec f;  // nonnegative, sums to 1 within 1e-12
};

struct SimplexSolution {
  SimplexWeights weights;      // mirror-descent iterate
  double value = 0.0;          // objective at `weights`
  SimplexWeights closed_form;  // f_k = (1/2beta) mu_k/(lambda_K - x_k)
};

// Partition built by counting classical locations theta_{i/N} into K
// half-open blocks (the last block closed on the right). Empty blocks are
// merged into their left neighbor (the leftmost one into its right
// neighbor) so every surviving weight is positive.
CoarseGrid build_partition(long N, int K);

// Same partition logic over an explicitly supplied ascending spectrum.
CoarseGrid build_partition_from_spectrum(const Vec& spectrum, int K);

// Index of the block containing `value` (values below the first point go
// to block 0, values at or above the last point to the last block).
int block_index(const CoarseGrid& grid, double value);

// g_K(lambda) = sum_k mu_k/(lambda - x_k) for lambda > x_K.
double g_K(const CoarseGrid& grid, double lambda);

// h_K(lambda) = sum_k mu_k log(lambda - x_k).
double h_K(const CoarseGrid& grid, double lambda);

// Unique lambda > x_K with g_K(lambda) = 2 beta, bisection to 1e-12.
double solve_lambda_K(const CoarseGrid& grid, double beta);

// F_K(beta) = beta*lambda_K - 1/2 - log(2 beta)/2 - h_K(lambda_K)/2.
double free_energy_F_K(const CoarseGrid& grid, double beta);

// Maximizes beta*sum x_k f_k + (1/2) sum mu_k log(f_k/mu_k) over the
// simplex by exponentiated gradient (1e5 iterations, step 1/sqrt(t)),
// independently of the lambda_K formula.
SimplexSolution simplex_optimum_oracle(const CoarseGrid& grid, double beta);

// |central finite difference of F_K at beta - (lambda_K - 1/(2 beta))|.
double derivative_identity_check(const CoarseGrid& grid, double beta);

// epsilon = sqrt2 - lambda_K(1/sqrt2); lambda_K(beta) >= sqrt2 - epsilon
// forces beta <= 1/sqrt2. Requires K >= 2.
double plefka_threshold(const CoarseGrid& grid);

// |sum_i spectrum_i sigma_i^2 - sum_k x_k sigma_[k]^2| where sigma_[k]^2
// collects the coordinates whose spectrum value falls in block k.
double blocking_error(const Vec& sigma, const CoarseGrid& grid,
                      const Vec& spectrum);

}  // namespace sphertap::coarse
