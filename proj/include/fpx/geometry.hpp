#pragma once

// Element geometry and tensor-product evaluation. Nodal data is stored
// coordinate-major: for coordinate c the N^{d_r} values are contiguous and
// ordered lexicographically (first reference index fastest).

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fpx/basis.hpp"
#include "fpx/error.hpp"
#include "fpx/small_matrix.hpp"

namespace fpx {

inline int ipow(int base, int exp) {
  int v = 1;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

struct ElementGeometry {
  int dim = 2;      // physical dimension d
  int ref_dim = 2;  // reference dimension d_r <= d
  int order = 1;
  std::vector<double> nodes;  // dim x N^{ref_dim}

  int nodes_per_dir() const { return order + 1; }
  int node_count() const { return ipow(order + 1, ref_dim); }
  bool is_surface() const { return ref_dim < dim; }

  std::span<const double> component(int c) const {
    const auto n = static_cast<std::size_t>(node_count());
    return {nodes.data() + c * n, n};
  }
  std::span<double> component(int c) {
    const auto n = static_cast<std::size_t>(node_count());
    return {nodes.data() + c * n, n};
  }
  Point node(int k) const {
    Point p{};
    for (int c = 0; c < dim; ++c) p[c] = component(c)[k];
    return p;
  }
  void set_node(int k, const Point& p) {
    for (int c = 0; c < dim; ++c) component(c)[k] = p[c];
  }

  static ElementGeometry zeros(int dim, int ref_dim, int order) {
    ElementGeometry g{dim, ref_dim, order, {}};
    g.nodes.assign(static_cast<std::size_t>(dim) * g.node_count(), 0.0);
    return g;
  }
};

/// Throws DegenerateElement for inconsistent shape or non-finite nodes.
inline void validate(const ElementGeometry& g) {
  if (g.dim < 2 || g.dim > 3 || g.ref_dim < 1 || g.ref_dim > g.dim)
    throw InvalidArgument("element dimensions d=" + std::to_string(g.dim) +
                          ", d_r=" + std::to_string(g.ref_dim) + " unsupported");
  if (g.order < 1 || g.order > kMaxOrder)
    throw InvalidArgument("element order " + std::to_string(g.order) + " unsupported");
  if (g.nodes.size() != static_cast<std::size_t>(g.dim) * g.node_count())
    throw DegenerateElement("element has " + std::to_string(g.nodes.size()) +
                            " coordinates, expected " +
                            std::to_string(g.dim * g.node_count()));
  for (double v : g.nodes)
    if (!std::isfinite(v)) throw DegenerateElement("element has non-finite nodal coordinates");
}

/// x(r), G_ij = dx_i/dr_j and, on request, H[i][j][k] = d2 x_i / dr_j dr_k.
struct MapEval {
  Vec3 x{};
  Mat3 grad{};
  std::array<Mat3, 3> hess{};
};

namespace detail {

struct Basis1D {
  std::array<double, kMaxNodes> v{}, d{}, d2{};
};

inline void contract_line(int n, const double* u, const Basis1D& b, bool second, double* out) {
  double a0 = 0, a1 = 0, a2 = 0;
  for (int i = 0; i < n; ++i) {
    a0 += u[i] * b.v[i];
    a1 += u[i] * b.d[i];
    if (second) a2 += u[i] * b.d2[i];
  }
  out[0] = a0;
  out[1] = a1;
  out[2] = a2;
}

}  // namespace detail

/// Sum-factorized evaluation of the element map at r. Work per coordinate is
/// O(N^{d_r}) for the first contraction and lower order for the rest; the
/// six (2D) or eighteen (3D, per-coordinate symmetric) second-derivative
/// terms are only accumulated when `hessian` is set.
inline MapEval forward_map(const ReferenceBasis& basis, const ElementGeometry& g, const Vec3& r,
                           bool hessian = false) {
  const int n = basis.size();
  std::array<detail::Basis1D, 3> b;
  for (int a = 0; a < g.ref_dim; ++a)
    basis.eval(r[a], b[a].v.data(), b[a].d.data(), hessian ? b[a].d2.data() : nullptr);

  MapEval out;
  for (int c = 0; c < g.dim; ++c) {
    const double* u = g.component(c).data();
    auto& H = out.hess[c];
    if (g.ref_dim == 1) {
      double s[3];
      detail::contract_line(n, u, b[0], hessian, s);
      out.x[c] = s[0];
      out.grad[c][0] = s[1];
      H[0][0] = s[2];
    } else if (g.ref_dim == 2) {
      // A[j] = sum_i u_ij {phi_i, phi_i', phi_i''}(r)
      double x = 0, xr = 0, xs = 0, xrr = 0, xrs = 0, xss = 0;
      for (int j = 0; j < n; ++j) {
        double a[3];
        detail::contract_line(n, u + j * n, b[0], hessian, a);
        const double vs = b[1].v[j], ds = b[1].d[j];
        x += a[0] * vs;
        xr += a[1] * vs;
        xs += a[0] * ds;
        if (hessian) {
          xrr += a[2] * vs;
          xrs += a[1] * ds;
          xss += a[0] * b[1].d2[j];
        }
      }
      out.x[c] = x;
      out.grad[c][0] = xr;
      out.grad[c][1] = xs;
      H[0][0] = xrr;
      H[0][1] = H[1][0] = xrs;
      H[1][1] = xss;
    } else {
      double x = 0, xr = 0, xs = 0, xt = 0;
      double xrr = 0, xss = 0, xtt = 0, xrs = 0, xrt = 0, xst = 0;
      for (int k = 0; k < n; ++k) {
        // B[k] = sum_j A[j,k] * {phi_j, phi_j', phi_j''}(s)
        double b00 = 0, b01 = 0, b02 = 0, b10 = 0, b11 = 0, b20 = 0;
        for (int j = 0; j < n; ++j) {
          double a[3];
          detail::contract_line(n, u + (k * n + j) * n, b[0], hessian, a);
          const double vs = b[1].v[j], ds = b[1].d[j];
          b00 += a[0] * vs;
          b01 += a[0] * ds;
          b10 += a[1] * vs;
          if (hessian) {
            b02 += a[0] * b[1].d2[j];
            b11 += a[1] * ds;
            b20 += a[2] * vs;
          }
        }
        const double vt = b[2].v[k], dt = b[2].d[k];
        x += b00 * vt;
        xt += b00 * dt;
        xs += b01 * vt;
        xr += b10 * vt;
        if (hessian) {
          xtt += b00 * b[2].d2[k];
          xst += b01 * dt;
          xss += b02 * vt;
          xrt += b10 * dt;
          xrs += b11 * vt;
          xrr += b20 * vt;
        }
      }
      out.x[c] = x;
      out.grad[c] = {xr, xs, xt};
      H[0][0] = xrr;
      H[1][1] = xss;
      H[2][2] = xtt;
      H[0][1] = H[1][0] = xrs;
      H[0][2] = H[2][0] = xrt;
      H[1][2] = H[2][1] = xst;
    }
  }
  return out;
}

/// Value of a scalar tensor-product polynomial with nodal values u (N^{d_r},
/// lexicographic) at r.
inline double tensor_interpolate(const ReferenceBasis& basis, int ref_dim,
                                 std::span<const double> u, const Vec3& r) {
  const int n = basis.size();
  std::array<std::array<double, kMaxNodes>, 3> phi{};
  for (int a = 0; a < ref_dim; ++a) basis.eval(r[a], phi[a].data());
  auto line = [&](const double* v) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += v[i] * phi[0][i];
    return s;
  };
  if (ref_dim == 1) return line(u.data());
  if (ref_dim == 2) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += line(u.data() + j * n) * phi[1][j];
    return s;
  }
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    double t = 0.0;
    for (int j = 0; j < n; ++j) t += line(u.data() + (k * n + j) * n) * phi[1][j];
    s += t * phi[2][k];
  }
  return s;
}

/// Reference coordinates of node k in lexicographic order.
inline Vec3 node_reference_coords(const ReferenceBasis& basis, int ref_dim, int k) {
  const int n = basis.size();
  Vec3 r{};
  for (int a = 0; a < ref_dim; ++a) {
    r[a] = basis.nodes()[k % n];
    k /= n;
  }
  return r;
}

}  // namespace fpx
