#pragma once

// Shared helpers for the test suites: seeded RNG, element builders and
// reference-space samplers.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fpx/basis.hpp"
#include "fpx/geometry.hpp"
#include "fpx/small_matrix.hpp"

namespace fpxt {

using fpx::ElementGeometry;
using fpx::Mat3;
using fpx::ReferenceBasis;
using fpx::Vec3;

using Rng = std::mt19937_64;

inline double uni(Rng& rng, double a = -1.0, double b = 1.0) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline Vec3 random_ref(Rng& rng, int ref_dim, double lim = 1.0) {
  Vec3 r{};
  for (int a = 0; a < ref_dim; ++a) r[a] = uni(rng, -lim, lim);
  return r;
}

/// Element whose nodes sample x_of_r at the GLL tensor grid.
template <class F>
ElementGeometry element_from_map(const ReferenceBasis& b, int dim, int ref_dim, F&& x_of_r) {
  auto g = ElementGeometry::zeros(dim, ref_dim, b.order());
  for (int k = 0; k < g.node_count(); ++k)
    g.set_node(k, x_of_r(fpx::node_reference_coords(b, ref_dim, k)));
  return g;
}

inline ElementGeometry identity_element(const ReferenceBasis& b, int dim) {
  return element_from_map(b, dim, dim, [](const Vec3& r) { return r; });
}

/// Smooth random map A r + c + amp * sin(...) with a well-conditioned A.
/// With amp small against the singular values of A the map is invertible.
struct RandomMap {
  int dim = 2;
  int ref_dim = 2;
  Mat3 a{};
  Vec3 c{};
  double amp = 0.0;
  Mat3 freq{};
  Vec3 phase{};

  Vec3 operator()(const Vec3& r) const {
    Vec3 x{};
    for (int i = 0; i < dim; ++i) {
      double s = c[i];
      double arg = phase[i];
      for (int j = 0; j < ref_dim; ++j) {
        s += a[i][j] * r[j];
        arg += freq[i][j] * r[j];
      }
      x[i] = s + amp * std::sin(arg);
    }
    return x;
  }
};

/// Rotation times diagonal scaling in [0.5, 1.5] plus a bounded sinusoidal
/// bump. Surfaces (ref_dim < dim) use the first ref_dim columns.
inline RandomMap random_map(Rng& rng, int dim, int ref_dim, double amp) {
  RandomMap m;
  m.dim = dim;
  m.ref_dim = ref_dim;
  const double th = uni(rng, 0.0, 2.0 * std::numbers::pi);
  Mat3 rot = fpx::identity3();
  if (dim == 2) {
    rot = Mat3{{{std::cos(th), -std::sin(th), 0.0}, {std::sin(th), std::cos(th), 0.0}, {0, 0, 1}}};
  } else {
    Vec3 axis{uni(rng), uni(rng), uni(rng)};
    const double n = fpx::norm(axis);
    for (double& v : axis) v /= n;
    Vec3 to{std::cos(th), std::sin(th), 0.0};
    rot = fpx::rotation_between(axis, to);
  }
  for (int i = 0; i < dim; ++i) {
    const double s = uni(rng, 0.5, 1.5);
    for (int j = 0; j < dim; ++j) m.a[j][i] = rot[j][i] * s;
    m.c[i] = uni(rng, -2.0, 2.0);
    m.phase[i] = uni(rng, 0.0, 2.0 * std::numbers::pi);
    for (int j = 0; j < ref_dim; ++j) m.freq[i][j] = uni(rng, -1.2, 1.2);
  }
  m.amp = amp;
  return m;
}

inline ElementGeometry random_element(const ReferenceBasis& b, Rng& rng, int dim, int ref_dim,
                                      double amp = 0.12) {
  return element_from_map(b, dim, ref_dim, random_map(rng, dim, ref_dim, amp));
}

}  // namespace fpxt
