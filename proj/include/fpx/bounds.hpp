#pragma once

// Piecewise-linear bounds of polynomials on [-1, 1] and [-1, 1]^2, and the
// axis-aligned / oriented boxes built from them for whole elements.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fpx/basis.hpp"
#include "fpx/error.hpp"
#include "fpx/geometry.hpp"
#include "fpx/small_matrix.hpp"

namespace fpx {

struct FunctionBounds1D {
  std::vector<double> lower;  // at eta_j
  std::vector<double> upper;

  double min() const { return *std::min_element(lower.begin(), lower.end()); }
  double max() const { return *std::max_element(upper.begin(), upper.end()); }
};

/// Bounds of the interpolant through u (N values). The linear part a0 + a1 r
/// is carried exactly; only the residual is bounded through the envelopes.
inline FunctionBounds1D bound_function_1d(const BasisEnvelope& env, std::span<const double> u) {
  const int n = env.n, m = env.m;
  const LinearPart lp = env.legendre_coeffs(u);
  std::array<double, kMaxNodes> w{};
  for (int i = 0; i < n; ++i) w[i] = u[i] - lp.a0 - lp.a1 * env.nodes[i];
  FunctionBounds1D out;
  out.lower.resize(m);
  out.upper.resize(m);
  for (int j = 0; j < m; ++j) {
    double lo = lp.a0 + lp.a1 * env.eta[j], hi = lo;
    for (int i = 0; i < n; ++i) {
      const double a = w[i] * env.lower_at(i, j), b = w[i] * env.upper_at(i, j);
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    out.lower[j] = lo;
    out.upper[j] = hi;
  }
  return out;
}

/// M x M bounds at (eta_k, eta_l), index k + m * l.
struct FunctionBounds2D {
  int m = 0;
  std::vector<double> lower;
  std::vector<double> upper;

  double lower_at(int k, int l) const { return lower[static_cast<std::size_t>(l) * m + k]; }
  double upper_at(int k, int l) const { return upper[static_cast<std::size_t>(l) * m + k]; }
  double min() const { return *std::min_element(lower.begin(), lower.end()); }
  double max() const { return *std::max_element(upper.begin(), upper.end()); }
};

/// Bounds of the tensor interpolant through u (N x N, i fastest), from the
/// raw coefficients. The r direction is contracted first, leaving an interval
/// [lo_jk, hi_jk] per (j, k); the s direction then takes the extreme of the
/// four interval-envelope products. O(N^2 M + N M^2) work.
///
/// Every pass-2 interval lies inside the naive double-loop interval, and the
/// two agree exactly wherever the s-envelope is degenerate (l = 0, m - 1).
inline FunctionBounds2D bound_function_2d(const BasisEnvelope& env, std::span<const double> u) {
  const int n = env.n, m = env.m;
  std::vector<double> lo1(static_cast<std::size_t>(n) * m), hi1(lo1.size());
  for (int j = 0; j < n; ++j) {
    const double* row = u.data() + static_cast<std::size_t>(j) * n;
    for (int k = 0; k < m; ++k) {
      double lo = 0.0, hi = 0.0;
      for (int i = 0; i < n; ++i) {
        const double a = row[i] * env.lower_at(i, k), b = row[i] * env.upper_at(i, k);
        lo += std::min(a, b);
        hi += std::max(a, b);
      }
      lo1[static_cast<std::size_t>(j) * m + k] = lo;
      hi1[static_cast<std::size_t>(j) * m + k] = hi;
    }
  }
  FunctionBounds2D out;
  out.m = m;
  out.lower.assign(static_cast<std::size_t>(m) * m, 0.0);
  out.upper.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int l = 0; l < m; ++l) {
    for (int k = 0; k < m; ++k) {
      double lo = 0.0, hi = 0.0;
      for (int j = 0; j < n; ++j) {
        const double a = lo1[static_cast<std::size_t>(j) * m + k];
        const double b = hi1[static_cast<std::size_t>(j) * m + k];
        const double vl = env.lower_at(j, l), vu = env.upper_at(j, l);
        const double p0 = a * vl, p1 = a * vu, p2 = b * vl, p3 = b * vu;
        lo += std::min({p0, p1, p2, p3});
        hi += std::max({p0, p1, p2, p3});
      }
      out.lower[static_cast<std::size_t>(l) * m + k] = lo;
      out.upper[static_cast<std::size_t>(l) * m + k] = hi;
    }
  }
  return out;
}

struct BoxOptions {
  double expansion = 0.10;
  double zero_extent_inflation = 0.10;
  double zero_extent_threshold = 1e-12;  // relative to the largest extent
};

struct Aabb {
  int dim = 0;
  Vec3 lo{};
  Vec3 hi{};

  Vec3 center() const {
    Vec3 c{};
    for (int i = 0; i < dim; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }
  double measure() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= hi[i] - lo[i];
    return v;
  }
  double diagonal() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
  }
  void unite(const Aabb& o) {
    for (int i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], o.lo[i]);
      hi[i] = std::max(hi[i], o.hi[i]);
    }
  }
};

/// Inclusive product test, no tolerance.
inline bool aabb_contains(const Aabb& box, const Point& x) {
  for (int i = 0; i < box.dim; ++i)
    if (!((x[i] - box.lo[i]) * (box.hi[i] - x[i]) >= 0.0)) return false;
  return true;
}

inline constexpr double kObbTolerance = 1e-12;

/// Parallelepiped { x : |inverse (x - center)|_inf <= 1 }. An invalid OBB
/// (singular center frame) accepts every point so callers fall back to the
/// AABB alone.
struct Obb {
  int dim = 0;
  bool valid = false;
  Vec3 center{};
  Mat3 inverse{};
  std::string diagnostic;

  Vec3 to_frame(const Point& x) const {
    Vec3 d{};
    for (int i = 0; i < dim; ++i) d[i] = x[i] - center[i];
    return matvec(inverse, d, dim, dim);
  }
  double measure() const { return std::pow(2.0, dim) / std::abs(determinant(inverse, dim)); }
};

inline bool obb_contains(const Obb& box, const Point& x) {
  if (!box.valid) return true;
  const Vec3 y = box.to_frame(x);
  for (int i = 0; i < box.dim; ++i)
    if (!(std::abs(y[i]) <= 1.0 + kObbTolerance)) return false;
  return true;
}

namespace detail {

/// Gathers the N^{d_r - 1} nodal values of face `f` of a volume element.
/// Faces are ordered r=-1, r=+1, s=-1, s=+1, t=-1, t=+1; on each face the
/// remaining reference axes keep their order (lower axis fastest).
inline void gather_face(std::span<const double> u, int n, int ref_dim, int f, double* out) {
  const int axis = f / 2;
  const int fixed = (f % 2 == 0) ? 0 : n - 1;
  if (ref_dim == 2) {
    for (int a = 0; a < n; ++a) out[a] = axis == 0 ? u[fixed + n * a] : u[a + n * fixed];
    return;
  }
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) {
      int idx;
      if (axis == 0) idx = fixed + n * (a + n * b);
      else if (axis == 1) idx = a + n * (fixed + n * b);
      else idx = a + n * (b + n * fixed);
      out[a + n * b] = u[idx];
    }
}

inline std::pair<double, double> bound_range(const BasisEnvelope& env, int ref_dim,
                                             std::span<const double> u) {
  if (ref_dim == 1) {
    const auto b = bound_function_1d(env, u);
    return {b.min(), b.max()};
  }
  const auto b = bound_function_2d(env, u);
  return {b.min(), b.max()};
}

}  // namespace detail

/// Unexpanded coordinate bounds of an element. Volume quads and hexes bound
/// each coordinate on their boundary edges / faces (the extremes of the map
/// lie there); surface elements bound the coordinate functions directly.
inline Aabb raw_element_bounds(const BasisEnvelope& env, const ElementGeometry& g) {
  Aabb box;
  box.dim = g.dim;
  const int n = g.nodes_per_dir();
  if (env.n != n)
    throw InvalidArgument("envelope has N=" + std::to_string(env.n) + ", element N=" +
                          std::to_string(n));
  std::vector<double> face(static_cast<std::size_t>(n) * n);
  for (int c = 0; c < g.dim; ++c) {
    const auto u = g.component(c);
    double lo = INFINITY, hi = -INFINITY;
    if (g.is_surface() || g.ref_dim == 1) {
      std::tie(lo, hi) = detail::bound_range(env, g.ref_dim, u);
    } else {
      for (int f = 0; f < 2 * g.ref_dim; ++f) {
        detail::gather_face(u, n, g.ref_dim, f, face.data());
        const auto [a, b] = detail::bound_range(
            env, g.ref_dim - 1,
            std::span<const double>(face.data(), static_cast<std::size_t>(ipow(n, g.ref_dim - 1))));
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
    }
    box.lo[c] = lo;
    box.hi[c] = hi;
  }
  return box;
}

namespace detail {

/// Expansion about the center on every axis. Axes flagged in `flat` (or whose
/// extent is below the threshold) additionally get a pad of
/// zero_extent_inflation * `flat_scale` / 2 on each side; when `flat_scale` is
/// not given it is the smallest non-flat extent of the box itself.
inline void expand(Aabb& box, const BoxOptions& opt, std::array<bool, 3> flat = {},
                   double flat_scale = -1.0) {
  double lmax = 0.0, mag = 0.0;
  for (int i = 0; i < box.dim; ++i) {
    lmax = std::max(lmax, box.hi[i] - box.lo[i]);
    mag = std::max({mag, std::abs(box.lo[i]), std::abs(box.hi[i])});
  }
  // Rounding in the bounds leaves a collapsed element with extents of a few
  // ulps of its coordinates.
  if (!(lmax > 1e-13 * mag) || !std::isfinite(lmax))
    throw DegenerateElement("element bounding box has no extent");
  for (int i = 0; i < box.dim; ++i)
    if (box.hi[i] - box.lo[i] < opt.zero_extent_threshold * lmax) flat[i] = true;
  if (flat_scale < 0.0) {
    flat_scale = INFINITY;
    for (int i = 0; i < box.dim; ++i)
      if (!flat[i]) flat_scale = std::min(flat_scale, box.hi[i] - box.lo[i]);
    if (!std::isfinite(flat_scale)) flat_scale = lmax;
  }
  for (int i = 0; i < box.dim; ++i) {
    double pad = 0.5 * opt.expansion * (box.hi[i] - box.lo[i]);
    if (flat[i]) pad += 0.5 * opt.zero_extent_inflation * flat_scale;
    box.lo[i] -= pad;
    box.hi[i] += pad;
  }
}

}  // namespace detail

inline Aabb element_aabb(const BasisEnvelope& env, const ElementGeometry& g,
                         const BoxOptions& opt = {}) {
  validate(g);
  Aabb box = raw_element_bounds(env, g);
  detail::expand(box, opt);
  return box;
}

/// Oriented box from the element's center frame. Volume elements use the
/// center Jacobian; line elements a rotation of the center tangent onto the
/// first axis; quads in 3D the composite rotation that sends the center
/// normal to the third axis and the two tangents into the first two
/// (a shear in that plane). The frame-space bounds come from the same
/// envelope machinery and are expanded like an AABB; normal axes of surface
/// elements are padded like zero-extent axes, scaled by the smallest
/// physical tangential extent.
inline Obb element_obb(const ReferenceBasis& basis, const BasisEnvelope& env,
                       const ElementGeometry& g, const BoxOptions& opt = {}) {
  validate(g);
  Obb obb;
  obb.dim = g.dim;
  const int d = g.dim;
  const MapEval c = forward_map(basis, g, Vec3{});

  Mat3 frame{};  // x_tilde = frame * (x - x_c)
  std::array<bool, 3> normal{};
  if (!g.is_surface()) {
    const auto inv = inverse(c.grad, d);
    if (!inv) {
      obb.diagnostic = "singular center Jacobian";
      return obb;
    }
    frame = *inv;
  } else if (g.ref_dim == 1) {
    Vec3 t{};
    for (int i = 0; i < d; ++i) t[i] = c.grad[i][0];
    const double tn = norm(t);
    if (!(tn > 0.0)) {
      obb.diagnostic = "zero center tangent";
      return obb;
    }
    for (double& v : t) v /= tn;
    frame = rotation_between(t, Vec3{1.0, 0.0, 0.0});
    for (int i = 1; i < d; ++i) normal[i] = true;
  } else {
    const Vec3 t1{c.grad[0][0], c.grad[1][0], c.grad[2][0]};
    const Vec3 t2{c.grad[0][1], c.grad[1][1], c.grad[2][1]};
    Vec3 nrm = cross(t1, t2);
    const double nn = norm(nrm);
    if (!(nn > 0.0) || nn <= 1e-14 * norm(t1) * norm(t2)) {
      obb.diagnostic = "degenerate center normal";
      return obb;
    }
    for (double& v : nrm) v /= nn;
    const Mat3 r1 = rotation_between(nrm, Vec3{0.0, 0.0, 1.0});
    const Vec3 a = matvec(r1, t1), b = matvec(r1, t2);
    const Mat3 mcols{{{a[0], b[0], 0.0}, {a[1], b[1], 0.0}, {0.0, 0.0, 1.0}}};
    const auto minv = inverse(mcols, 3);
    if (!minv) {
      obb.diagnostic = "degenerate center tangents";
      return obb;
    }
    frame = matmul(*minv, r1);
    normal[2] = true;
  }
  const auto frame_inv = inverse(frame, d);
  if (!frame_inv) {
    obb.diagnostic = "singular center frame";
    return obb;
  }

  ElementGeometry t = g;
  for (int k = 0; k < g.node_count(); ++k) {
    Vec3 dx{};
    const Point p = g.node(k);
    for (int i = 0; i < d; ++i) dx[i] = p[i] - c.x[i];
    t.set_node(k, matvec(frame, dx, d, d));
  }
  Aabb box = raw_element_bounds(env, t);
  double scale = -1.0;
  if (g.is_surface()) {
    scale = INFINITY;
    for (int a = 0; a < g.ref_dim; ++a) {
      Vec3 col{};
      for (int i = 0; i < d; ++i) col[i] = (*frame_inv)[i][a];
      scale = std::min(scale, (box.hi[a] - box.lo[a]) * norm(col, d));
    }
  }
  try {
    detail::expand(box, opt, normal, scale);
  } catch (const DegenerateElement&) {
    obb.diagnostic = "frame-space box has no extent";
    return obb;
  }

  // x_tilde in box  <=>  |D^{-1} (x_tilde - box center)| <= 1 with D = diag(L/2).
  Mat3 dinv{};
  Vec3 bc{};
  for (int i = 0; i < d; ++i) {
    dinv[i][i] = 2.0 / (box.hi[i] - box.lo[i]);
    bc[i] = 0.5 * (box.lo[i] + box.hi[i]);
  }
  obb.inverse = matmul(dinv, frame, d);
  const Vec3 off = matvec(*frame_inv, bc, d, d);
  for (int i = 0; i < d; ++i) obb.center[i] = c.x[i] + off[i];
  obb.valid = true;
  return obb;
}

}  // namespace fpx
