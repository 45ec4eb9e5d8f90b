#include "sphertap/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sphertap/analytic.hpp"
#include "sphertap/rng.hpp"

namespace sphertap::rmt {

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form with
// accumulation of the orthogonal transform in z (row-major, n x n).
void tred2(std::vector<double>& z, long n, Vec& d, Vec& e) {
  auto at = [&](long i, long j) -> double& { return z[i * n + j]; };
  for (long i = n - 1; i >= 1; --i) {
    const long l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (long k = 0; k <= l; ++k) scale += std::abs(at(i, k));
      if (scale == 0.0) {
        e[i] = at(i, l);
      } else {
        for (long k = 0; k <= l; ++k) {
          at(i, k) /= scale;
          h += at(i, k) * at(i, k);
        }
        double f = at(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        at(i, l) = f - g;
        f = 0.0;
        for (long j = 0; j <= l; ++j) {
          at(j, i) = at(i, j) / h;
          g = 0.0;
          for (long k = 0; k <= j; ++k) g += at(j, k) * at(i, k);
          for (long k = j + 1; k <= l; ++k) g += at(k, j) * at(i, k);
          e[j] = g / h;
          f += e[j] * at(i, j);
        }
        const double hh = f / (h + h);
        for (long j = 0; j <= l; ++j) {
          f = at(i, j);
          e[j] = g = e[j] - hh * f;
          for (long k = 0; k <= j; ++k)
            at(j, k) -= f * e[k] + g * at(i, k);
        }
      }
    } else {
      e[i] = at(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (long i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (long j = 0; j < i; ++j) {
        double g = 0.0;
        for (long k = 0; k < i; ++k) g += at(i, k) * at(k, j);
        for (long k = 0; k < i; ++k) at(k, j) -= g * at(k, i);
      }
    }
    d[i] = at(i, i);
    at(i, i) = 1.0;
    for (long j = 0; j < i; ++j) at(j, i) = at(i, j) = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal (d, e) accumulating rotations into z.
void tqli(Vec& d, Vec& e, std::vector<double>& z, long n) {
  auto at = [&](long i, long j) -> double& { return z[i * n + j]; };
  const double eps = std::numeric_limits<double>::epsilon();
  for (long i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (long l = 0; l < n; ++l) {
    int iter = 0;
    long m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50)
          throw std::runtime_error(
              "eigen_symmetric: no convergence for eigenvalue index " +
              std::to_string(l));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        long i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (long k = 0; k < n; ++k) {
            f = at(k, i + 1);
            at(k, i + 1) = s * at(k, i) + c * f;
            at(k, i) = c * at(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

Rng direction_stream(const GoeSample& s, int drop, std::uint64_t dir_seed) {
  if (dir_seed != 0) return Rng(dir_seed);
  return Rng(s.seed ^ (0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(drop)));
}

}  // namespace

FieldVector make_field(Vec components) {
  FieldVector f;
  f.magnitude = norm2(components);
  f.components = std::move(components);
  return f;
}

GoeSample sample_goe(long n, std::uint64_t seed) {
  if (n < 2) throw std::domain_error("sample_goe: n must be at least 2");
  GoeSample s;
  s.n = n;
  s.seed = seed;
  Rng rng(seed);
  std::vector<double> j(static_cast<std::size_t>(n) * n);
  for (double& v : j) v = rng.gaussian();
  s.matrix.resize(j.size());
  for (long r = 0; r < n; ++r)
    for (long c = 0; c < n; ++c)
      s.matrix[r * n + c] = 0.5 * (j[r * n + c] + j[c * n + r]);
  eigen_symmetric(s.matrix, n, s.spectrum, s.basis);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (double& v : s.spectrum) v /= root_n;
  return s;
}

void eigen_symmetric(const std::vector<double>& a, long n, Vec& values,
                     std::vector<double>& vectors) {
  if (n < 1 || a.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("eigen_symmetric: bad dimensions");
  double amax = 0.0;
  for (double v : a) amax = std::max(amax, std::abs(v));
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j)
      if (std::abs(a[i * n + j] - a[j * n + i]) > 1e-12 * std::max(1.0, amax))
        throw std::invalid_argument("eigen_symmetric: input not symmetric");

  vectors = a;
  values.assign(n, 0.0);
  Vec e(n, 0.0);
  if (n == 1) {
    values[0] = a[0];
    vectors[0] = 1.0;
    return;
  }
  tred2(vectors, n, values, e);
  tqli(values, e, vectors, n);

  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](long i, long j) { return values[i] < values[j]; });
  Vec sorted_values(n);
  std::vector<double> sorted_vectors(vectors.size());
  for (long j = 0; j < n; ++j) {
    sorted_values[j] = values[order[j]];
    for (long i = 0; i < n; ++i)
      sorted_vectors[i * n + j] = vectors[i * n + order[j]];
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
}

double hamiltonian(const GoeSample& s, const Vec& sigma) {
  if (static_cast<long>(sigma.size()) != s.n)
    throw std::invalid_argument("hamiltonian: dimension mismatch");
  double quad = 0.0;
  for (long i = 0; i < s.n; ++i) {
    double row = 0.0;
    for (long j = 0; j < s.n; ++j) row += s.matrix[i * s.n + j] * sigma[j];
    quad += sigma[i] * row;
  }
  return std::sqrt(static_cast<double>(s.n)) * quad;
}

Vec hamiltonian_grad(const GoeSample& s, const Vec& sigma) {
  if (static_cast<long>(sigma.size()) != s.n)
    throw std::invalid_argument("hamiltonian_grad: dimension mismatch");
  Vec g(s.n, 0.0);
  for (long i = 0; i < s.n; ++i) {
    double row = 0.0;
    for (long j = 0; j < s.n; ++j) row += s.matrix[i * s.n + j] * sigma[j];
    g[i] = 2.0 * std::sqrt(static_cast<double>(s.n)) * row;
  }
  return g;
}

double rigidity_report(const GoeSample& s) {
  double worst = 0.0;
  for (long i = 1; i <= s.n; ++i) {
    const double classical =
        analytic::classical_location(static_cast<double>(i) / s.n);
    worst = std::max(worst, std::abs(s.spectrum[i - 1] - classical));
  }
  return worst;
}

Vec restricted_minor_spectrum(const GoeSample& s, int drop,
                              std::uint64_t dir_seed) {
  if (drop < 1 || drop >= s.n)
    throw std::domain_error("restricted_minor_spectrum: bad drop");
  const long n = s.n;
  Rng rng = direction_stream(s, drop, dir_seed);

  // Orthonormal basis whose last `drop` vectors are random: Gram-Schmidt
  // over the random directions followed by the coordinate vectors, keeping
  // the n - drop survivors as the restriction frame.
  std::vector<Vec> frame;
  frame.reserve(n);
  auto add_vector = [&](Vec v) {
    for (const Vec& u : frame) {
      const double c = dot(u, v);
      for (long k = 0; k < n; ++k) v[k] -= c * u[k];
    }
    const double nrm = norm2(v);
    if (nrm < 1e-10) return false;
    for (double& x : v) x /= nrm;
    frame.push_back(std::move(v));
    return true;
  };
  for (int t = 0; t < drop; ++t) {
    while (!add_vector(rng.gaussian_vec(n))) {
    }
  }
  std::vector<Vec> random_dirs(frame.begin(), frame.end());
  for (long j = 0; j < n && static_cast<long>(frame.size()) < n; ++j) {
    Vec ej(n, 0.0);
    ej[j] = 1.0;
    add_vector(std::move(ej));
  }
  if (static_cast<long>(frame.size()) != n)
    throw std::runtime_error("restricted_minor_spectrum: rank deficiency");

  const long m = n - drop;
  std::vector<const Vec*> w;
  for (long i = drop; i < n; ++i) w.push_back(&frame[i]);

  // B = W^T S W, assembled column by column.
  std::vector<double> b(static_cast<std::size_t>(m) * m);
  Vec sw(n);
  for (long c = 0; c < m; ++c) {
    const Vec& wc = *w[c];
    for (long i = 0; i < n; ++i) {
      double acc = 0.0;
      for (long j = 0; j < n; ++j) acc += s.matrix[i * n + j] * wc[j];
      sw[i] = acc;
    }
    for (long r = 0; r < m; ++r) b[r * m + c] = dot(*w[r], sw);
  }
  for (long r = 0; r < m; ++r)
    for (long c = r + 1; c < m; ++c) {
      const double avg = 0.5 * (b[r * m + c] + b[c * m + r]);
      b[r * m + c] = b[c * m + r] = avg;
    }

  Vec values;
  std::vector<double> vectors;
  eigen_symmetric(b, m, values, vectors);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (double& v : values) v /= root_n;
  return values;
}

bool minor_interlacing_check(const GoeSample& s, int drop,
                             std::uint64_t dir_seed) {
  if (drop < 1 || drop > 2)
    throw std::domain_error("minor_interlacing_check: drop must be 1 or 2");
  const Vec a = restricted_minor_spectrum(s, drop, dir_seed);
  const long m = s.n - drop;
  // Exact interlacing can be violated by eigensolver rounding alone, so a
  // few ulps of slack scaled to the spectral radius are allowed.
  const double slack =
      1e-10 * std::max(1.0, std::max(std::abs(s.spectrum.front()),
                                     std::abs(s.spectrum.back())));
  for (long i = 0; i < m; ++i) {
    if (a[i] < s.spectrum[i] - slack) return false;
    if (a[i] > s.spectrum[i + drop] + slack) return false;
  }
  return true;
}

long edge_eigencount(long N, double eps) {
  if (!(eps > 0.0) || !(eps < kSqrt2))
    throw std::domain_error("edge_eigencount: eps must lie in (0, sqrt 2)");
  long count = 0;
  for (long i = 1; i <= N; ++i) {
    const double theta =
        analytic::classical_location(static_cast<double>(i) / N);
    if (std::abs(theta) >= kSqrt2 - eps) ++count;
  }
  return count;
}

void dump_spectrum(const std::string& path, const GoeSample& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dump_spectrum: cannot open " + path);
  auto put_u64 = [&](std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
  };
  put_u64(s.seed);
  put_u64(static_cast<std::uint64_t>(s.n));
  for (double x : s.spectrum) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, 8);
    put_u64(bits);
  }
  if (!out) throw std::runtime_error("dump_spectrum: write failed");
}

SpectrumFile load_spectrum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_spectrum: cannot open " + path);
  auto get_u64 = [&]() {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("load_spectrum: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  };
  SpectrumFile f;
  f.seed = get_u64();
  f.n = static_cast<long>(get_u64());
  if (f.n < 0 || f.n > (1L << 32))
    throw std::runtime_error("load_spectrum: implausible dimension");
  f.spectrum.resize(f.n);
  for (long i = 0; i < f.n; ++i) {
    const std::uint64_t bits = get_u64();
    std::memcpy(&f.spectrum[i], &bits, 8);
  }
  return f;
}

}  // namespace sphertap::rmt
