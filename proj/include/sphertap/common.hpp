#pragma once

// Small shared vector helpers used across the library. All functions are
// pure and thread-safe.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sphertap {

using Vec = std::vector<double>;

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kInvSqrt2 = 0.7071067811865476;

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline void scale(Vec& a, double c) {
  for (double& x : a) x *= c;
}

// a += c*b
inline void axpy(Vec& a, double c, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

inline Vec normalized(Vec a) {
  const double n = norm2(a);
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  scale(a, 1.0 / n);
  return a;
}

}  // namespace sphertap
