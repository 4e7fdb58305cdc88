#pragma once

// Fixed-capacity vectors and matrices for the 1..3 dimensional quantities that
// appear per point and per element. Storage is always 3 (or 3x3); the active
// size is passed alongside and unused entries are kept at zero.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

namespace fpx {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// A physical point; components past the mesh dimension are zero.
using Point = Vec3;

inline constexpr Mat3 identity3() {
  return Mat3{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

inline double dot(const Vec3& a, const Vec3& b, int n = 3) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec3& a, int n = 3) { return std::sqrt(dot(a, a, n)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline Vec3 matvec(const Mat3& a, const Vec3& x, int rows = 3, int cols = 3) {
  Vec3 y{};
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) y[i] += a[i][j] * x[j];
  return y;
}

inline Mat3 matmul(const Mat3& a, const Mat3& b, int n = 3) {
  Mat3 c{};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
  return t;
}

inline double determinant(const Mat3& a, int n) {
  switch (n) {
    case 1: return a[0][0];
    case 2: return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    default:
      return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
             a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
             a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  }
}

/// Inverse of the leading n x n block by cofactors. Empty when the
/// determinant is zero or tiny relative to the entry scale.
inline std::optional<Mat3> inverse(const Mat3& a, int n) {
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a[i][j]));
  const double det = determinant(a, n);
  if (!(scale > 0.0) || !std::isfinite(det) ||
      std::abs(det) <= 1e-14 * std::pow(scale, n))
    return std::nullopt;
  Mat3 inv{};
  switch (n) {
    case 1: inv[0][0] = 1.0 / det; break;
    case 2:
      inv[0][0] = a[1][1] / det;
      inv[0][1] = -a[0][1] / det;
      inv[1][0] = -a[1][0] / det;
      inv[1][1] = a[0][0] / det;
      break;
    default:
      inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
      inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
      inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
      inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
      inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
      inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
      inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
      inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
      inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  }
  return inv;
}

/// Rotation taking the unit vector `from` onto the unit vector `to`
/// (Rodrigues' formula). For antiparallel input a half turn about an axis
/// orthogonal to `from` is returned.
inline Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  const Vec3 v = cross(from, to);
  const double s = norm(v);
  const double c = dot(from, to);
  if (s < 1e-14) {
    if (c > 0.0) return identity3();
    // Any axis orthogonal to `from`.
    Vec3 trial = std::abs(from[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    Vec3 axis = cross(from, trial);
    const double an = norm(axis);
    for (double& a : axis) a /= an;
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r[i][j] = 2.0 * axis[i] * axis[j] - (i == j ? 1.0 : 0.0);
    return r;
  }
  const Mat3 k{{{0.0, -v[2], v[1]}, {v[2], 0.0, -v[0]}, {-v[1], v[0], 0.0}}};
  const Mat3 k2 = matmul(k, k);
  const double f = (1.0 - c) / (s * s);
  Mat3 r = identity3();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] += k[i][j] + f * k2[i][j];
  return r;
}

/// Cholesky solve of the leading n x n block of a symmetric matrix. Fails
/// (empty) on a non-positive pivot or when the pivot ratio exceeds
/// `max_condition`.
inline std::optional<Vec3> cholesky_solve(const Mat3& a, const Vec3& b, int n,
                                          double max_condition) {
  Mat3 l{};
  double dmax = 0.0, dmin = INFINITY;
  for (int j = 0; j < n; ++j) {
    double d = a[j][j];
    for (int k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (!(d > 0.0)) return std::nullopt;
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
    l[j][j] = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  if (n > 0 && dmax > max_condition * dmin) return std::nullopt;
  Vec3 y{}, x{};
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l[i][k] * y[k];
    y[i] = s / l[i][i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= l[k][i] * x[k];
    x[i] = s / l[i][i];
  }
  return x;
}

}  // namespace fpx
