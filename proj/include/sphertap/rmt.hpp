#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sphertap/common.hpp"

namespace sphertap::rmt {

// Symmetric Gaussian matrix S = (J + J^T)/2 with its eigendecomposition.
// spectrum holds eig(S)/sqrt(n) ascending; basis is row-major with
// eigenvector j in column j, so S * basis_col(j) = sqrt(n) * spectrum[j] *
// basis_col(j).
struct GoeSample {
  long n = 0;
  std::uint64_t seed = 0;
  std::vector<double> matrix;
  Vec spectrum;
  std::vector<double> basis;
};

// External field together with its cached Euclidean norm.
struct FieldVector {
  Vec components;
  double magnitude = 0.0;
};

FieldVector make_field(Vec components);

GoeSample sample_goe(long n, std::uint64_t seed);

// Householder tridiagonalization followed by implicit-shift QL. Ascending
// eigenvalues; vectors holds the orthogonal matrix column-wise (row-major
// storage). Throws std::invalid_argument for non-symmetric input and
// std::runtime_error naming the eigenvalue index on non-convergence.
void eigen_symmetric(const std::vector<double>& a, long n, Vec& values,
                     std::vector<double>& vectors);

// Energy sqrt(n) sigma^T S sigma and its gradient 2 sqrt(n) S sigma.
double hamiltonian(const GoeSample& s, const Vec& sigma);
Vec hamiltonian_grad(const GoeSample& s, const Vec& sigma);

// max_i |theta_i^N - theta_{i/N}| against classical locations.
double rigidity_report(const GoeSample& s);

// Spectrum of the top-left (n-drop) block of S in a random orthonormal
// basis whose last `drop` vectors are fresh directions, divided by sqrt(n).
// dir_seed = 0 derives the direction stream from the sample seed.
Vec restricted_minor_spectrum(const GoeSample& s, int drop,
                              std::uint64_t dir_seed = 0);

// true iff theta_i^N <= a_i <= theta_{i+drop}^N for all i <= n-drop.
bool minor_interlacing_check(const GoeSample& s, int drop,
                             std::uint64_t dir_seed = 0);

// #\{i in 1..N : |theta_{i/N}| >= sqrt(2) - eps\} from classical locations.
long edge_eigencount(long N, double eps);

struct SpectrumFile {
  std::uint64_t seed = 0;
  long n = 0;
  Vec spectrum;
};

// Little-endian binary cache: seed u64, n u64, then n doubles.
void dump_spectrum(const std::string& path, const GoeSample& s);
SpectrumFile load_spectrum(const std::string& path);

}  // namespace sphertap::rmt
