#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sphertap/analytic.hpp"
#include "sphertap/quad.hpp"
#include "sphertap/rmt.hpp"
#include "sphertap/rng.hpp"

using namespace sphertap;
using namespace sphertap::rmt;

namespace {

double reconstruction_residual(const std::vector<double>& a, long n,
                               const Vec& values,
                               const std::vector<double>& vectors) {
  double worst = 0.0;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      double acc = 0.0;
      for (long k = 0; k < n; ++k)
        acc += vectors[i * n + k] * values[k] * vectors[j * n + k];
      worst = std::max(worst, std::abs(acc - a[i * n + j]));
    }
  return worst;
}

double orthogonality_residual(const std::vector<double>& q, long n) {
  double worst = 0.0;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      double acc = 0.0;
      for (long k = 0; k < n; ++k) acc += q[k * n + i] * q[k * n + j];
      worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

std::vector<double> random_symmetric(long n, Rng& rng) {
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (long i = 0; i < n; ++i)
    for (long j = i; j < n; ++j) a[i * n + j] = a[j * n + i] = rng.gaussian();
  return a;
}

}  // namespace

TEST_CASE("eigen_symmetric closed forms") {
  // [[a,b],[b,a]] -> {a-b, a+b} with eigenvectors (1,-1)/sqrt2, (1,1)/sqrt2
  const double a = 0.7, b = 0.4;
  std::vector<double> m = {a, b, b, a};
  Vec values;
  std::vector<double> vectors;
  eigen_symmetric(m, 2, values, vectors);
  CHECK(values[0] == doctest::Approx(a - b).epsilon(1e-13));
  CHECK(values[1] == doctest::Approx(a + b).epsilon(1e-13));
  CHECK(reconstruction_residual(m, 2, values, vectors) <= 1e-13);

  // circulant 3x3 with row (2,1,1): eigenvalues {1, 1, 4}
  std::vector<double> c = {2, 1, 1, 1, 2, 1, 1, 1, 2};
  eigen_symmetric(c, 3, values, vectors);
  CHECK(values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(values[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(values[2] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(orthogonality_residual(vectors, 3) <= 1e-12);

  std::vector<double> asym = {0.0, 1.0, 0.0, 0.0};
  CHECK_THROWS_AS(eigen_symmetric(asym, 2, values, vectors),
                  std::invalid_argument);
}

TEST_CASE("eigen_symmetric random-matrix residuals") {
  Rng rng(7);
  for (long n : {5L, 50L, 200L}) {
    const auto m = random_symmetric(n, rng);
    Vec values;
    std::vector<double> vectors;
    eigen_symmetric(m, n, values, vectors);
    double amax = 0.0, trace = 0.0, vsum = 0.0;
    for (double v : m) amax = std::max(amax, std::abs(v));
    for (long i = 0; i < n; ++i) trace += m[i * n + i];
    for (long i = 1; i < n; ++i) CHECK(values[i] >= values[i - 1]);
    for (double v : values) vsum += v;
    CHECK(std::abs(vsum - trace) <= 1e-10 * std::max(1.0, std::abs(trace)));
    CHECK(reconstruction_residual(m, n, values, vectors) <= 1e-8 * amax);
    CHECK(orthogonality_residual(vectors, n) <= 1e-10);
  }
}

TEST_CASE("sample_goe moments, symmetry, determinism") {
  const auto s1 = sample_goe(12, 99);
  const auto s2 = sample_goe(12, 99);
  CHECK(s1.matrix == s2.matrix);
  CHECK(s1.spectrum == s2.spectrum);
  for (long i = 0; i < 12; ++i)
    for (long j = 0; j < 12; ++j)
      CHECK(s1.matrix[i * 12 + j] == s1.matrix[j * 12 + i]);

  // entry (1,2) over 10^4 seeds: mean within 3 sigma of 0, variance of the
  // off-diagonal within 5% of 1/2
  const int reps = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto s = sample_goe(4, 1000 + r);
    const double v = s.matrix[1 * 4 + 2];
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / reps;
  const double var = sumsq / reps - mean * mean;
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(0.5 / reps));
  CHECK(std::abs(var - 0.5) <= 0.05 * 0.5);

  // diagonal variance 1
  double dsum = 0.0, dsumsq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto s = sample_goe(4, 50000 + r);
    const double v = s.matrix[0];
    dsum += v;
    dsumsq += v * v;
  }
  const double dvar = dsumsq / reps - (dsum / reps) * (dsum / reps);
  CHECK(std::abs(dvar - 1.0) <= 0.05);

  CHECK_THROWS_AS(sample_goe(1, 0), std::domain_error);
}

TEST_CASE("GoeSample eigendecomposition invariants") {
  const auto s = sample_goe(60, 5);
  const double root_n = std::sqrt(60.0);
  CHECK(orthogonality_residual(s.basis, s.n) <= 1e-10);
  double worst = 0.0;
  for (long i = 0; i < s.n; ++i)
    for (long j = 0; j < s.n; ++j) {
      double acc = 0.0;
      for (long k = 0; k < s.n; ++k)
        acc += s.matrix[i * s.n + k] * s.basis[k * s.n + j];
      worst = std::max(
          worst, std::abs(acc - s.basis[i * s.n + j] * root_n * s.spectrum[j]));
    }
  CHECK(worst <= 1e-8);
  for (long i = 1; i < s.n; ++i) CHECK(s.spectrum[i] >= s.spectrum[i - 1]);
}

TEST_CASE("hamiltonian scaling, gradient linearity, sup bound") {
  const auto s = sample_goe(40, 11);
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const Vec sigma = rng.gaussian_vec(40);
    const double lam = 2.0 * rng.uniform() - 1.0;
    const double h1 = hamiltonian(s, sigma);
    Vec scaled = sigma;
    scale(scaled, lam);
    CHECK(std::abs(hamiltonian(s, scaled) - lam * lam * h1) <=
          1e-12 * std::max(1.0, std::abs(h1)));

    const Vec tau = rng.gaussian_vec(40);
    Vec both = sigma;
    for (int k = 0; k < 40; ++k) both[k] += tau[k];
    const Vec ga = hamiltonian_grad(s, sigma);
    const Vec gb = hamiltonian_grad(s, tau);
    const Vec gs = hamiltonian_grad(s, both);
    for (int k = 0; k < 40; ++k)
      CHECK(std::abs(gs[k] - ga[k] - gb[k]) <=
            1e-12 * std::max(1.0, std::abs(gs[k])));
  }

  const auto big = sample_goe(400, 21);
  const double sup =
      std::max(std::abs(big.spectrum.front()), std::abs(big.spectrum.back()));
  CHECK(sup <= 2.5);  // |H_N(sigma)|/N over the ball equals max |theta|
}

TEST_CASE("gradient matches quadratic form") {
  const auto s = sample_goe(25, 17);
  Rng rng(9);
  const Vec sigma = rng.unit_sphere_vec(25);
  const Vec g = hamiltonian_grad(s, sigma);
  CHECK(dot(g, sigma) == doctest::Approx(2.0 * hamiltonian(s, sigma))
                             .epsilon(1e-12));
}

TEST_CASE("rigidity against classical locations") {
  int ok = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    const auto s = sample_goe(500, seed);
    const double dev = rigidity_report(s);
    if (dev <= 0.25) ++ok;
    CHECK(std::abs(s.spectrum.back() - kSqrt2) <= 0.2);
  }
  CHECK(ok >= 9);

  auto median_dev = [](long n, int seeds) {
    Vec devs;
    for (int seed = 101; seed <= 100 + seeds; ++seed)
      devs.push_back(rigidity_report(sample_goe(n, seed)));
    std::sort(devs.begin(), devs.end());
    return devs[devs.size() / 2];
  };
  CHECK(median_dev(800, 6) < median_dev(100, 6));
}

TEST_CASE("minor interlacing") {
  for (int seed : {1, 2, 3, 4, 5}) {
    const auto s = sample_goe(80, seed);
    CHECK(minor_interlacing_check(s, 1));
    CHECK(minor_interlacing_check(s, 2));
  }

  // two independent 2-dim restrictions stay uniformly close at N=400
  const auto s = sample_goe(400, 8);
  const Vec a = restricted_minor_spectrum(s, 2, 1001);
  const Vec b = restricted_minor_spectrum(s, 2, 2002);
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    gap = std::max(gap, std::abs(a[i] - b[i]));
  CHECK(gap <= 0.1);

  CHECK_THROWS_AS(minor_interlacing_check(s, 3), std::domain_error);
  CHECK_THROWS_AS(minor_interlacing_check(s, 0), std::domain_error);
}

TEST_CASE("edge eigenvalue counts") {
  CHECK(edge_eigencount(101, kSqrt2 - 1e-9) == 101);
  CHECK(edge_eigencount(1000, 0.1) <= 1000 * 0.1 * 2.0 * (kSqrt2 / 3.141592653589793) * 1.5);
  long prev = 0;
  for (double eps : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    const long c = edge_eigencount(1000, eps);
    CHECK(c >= prev);
    prev = c;
  }

  // quadrature oracle: fraction within eps of either edge
  const double eps = 0.1;
  const double frac =
      analytic::semicircle_cdf(-kSqrt2 + eps) +
      1.0 - analytic::semicircle_cdf(kSqrt2 - eps);
  const long count = edge_eigencount(1000, eps);
  CHECK(std::abs(count / 1000.0 - frac) <= 2e-3);

  CHECK_THROWS_AS(edge_eigencount(100, 0.0), std::domain_error);
  CHECK_THROWS_AS(edge_eigencount(100, 2.0), std::domain_error);
}

TEST_CASE("spectrum dump round trip") {
  const auto s = sample_goe(16, 2024);
  const auto path =
      (std::filesystem::temp_directory_path() / "sphertap_spec_test.bin")
          .string();
  dump_spectrum(path, s);
  const auto f = load_spectrum(path);
  CHECK(f.seed == s.seed);
  CHECK(f.n == s.n);
  REQUIRE(f.spectrum.size() == s.spectrum.size());
  for (long i = 0; i < s.n; ++i) CHECK(f.spectrum[i] == s.spectrum[i]);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_spectrum("/nonexistent/dir/file.bin"),
                  std::runtime_error);
}

TEST_CASE("make_field magnitude invariant") {
  const auto f = make_field({3.0, 4.0});
  CHECK(f.magnitude == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::abs(norm2(f.components) - f.magnitude) <= 1e-12);
}
