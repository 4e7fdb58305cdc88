#pragma once

// Analytic fields sampled at the GLL nodes of a given order on every element.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fpx/basis.hpp"
#include "fpx/error.hpp"
#include "fpx/geometry.hpp"
#include "fpx/mesh.hpp"

namespace fpx {

using FieldFunction = std::function<void(const Point& x, double* out)>;

/// Samples fn at the (order+1)^{d_r} GLL nodes of every element.
inline Field sample_field(const Mesh& mesh, int order, int components, const FieldFunction& fn) {
  if (order < 1 || order > kMaxOrder) throw InvalidArgument("field order out of range");
  if (components < 1) throw InvalidArgument("field needs at least one component");
  const ReferenceBasis geo(mesh.order);
  const ReferenceBasis fb(order);
  Field f{order, mesh.ref_dim, components, {}};
  const std::size_t nodes = f.nodes();
  f.data.resize(mesh.size() * f.block_size());
  std::vector<double> tmp(components);
  for (std::size_t e = 0; e < mesh.size(); ++e) {
    double* block = f.data.data() + e * f.block_size();
    for (std::size_t k = 0; k < nodes; ++k) {
      const Vec3 r = node_reference_coords(fb, mesh.ref_dim, static_cast<int>(k));
      fn(forward_map(geo, mesh.elements[e], r).x, tmp.data());
      for (int c = 0; c < components; ++c) block[c * nodes + k] = tmp[c];
    }
  }
  return f;
}

inline void constant_value(double c, const Point&, double* out) { out[0] = c; }

/// Sum of (a.x + b)^k for k = 0..degree: total degree exactly `degree`, with
/// every monomial present.
inline double polynomial_value(int degree, const Point& x) {
  const double t = 0.7 * x[0] - 0.4 * x[1] + 0.3 * x[2] + 0.2;
  double s = 0.0, p = 1.0;
  for (int k = 0; k <= degree; ++k) {
    s += p;
    p *= t;
  }
  return s;
}

struct Wavefront {
  double alpha = 200.0;
  double xc = -0.05;
  double yc = -0.05;
  double radius = 0.7;

  double operator()(const Point& x) const {
    const double dx = x[0] - xc, dy = x[1] - yc;
    return std::atan(alpha * (std::sqrt(dx * dx + dy * dy) - radius));
  }
};

/// Divergence-free cellular flow with period 2 in x and y; zero along z.
inline Vec3 cellular_velocity(const Point& x) {
  const double pi = std::numbers::pi;
  return {std::sin(pi * x[0]) * std::cos(pi * x[1]), -std::cos(pi * x[0]) * std::sin(pi * x[1]), 0.0};
}

/// Named fields: "constant" (value 1), "coordinates" (x itself, dim
/// components), "polynomial" (degree = order unless given), "wavefront",
/// "uniform" (velocity (1, 0, 0)), "cellular", "zero" (velocity).
inline Field analytic_field(const std::string& name, const Mesh& mesh, int order, int degree = -1) {
  const int d = mesh.dim;
  if (name == "constant")
    return sample_field(mesh, order, 1, [](const Point& x, double* o) { constant_value(1.0, x, o); });
  if (name == "coordinates")
    return sample_field(mesh, order, d, [d](const Point& x, double* o) {
      for (int i = 0; i < d; ++i) o[i] = x[i];
    });
  if (name == "polynomial") {
    const int deg = degree < 0 ? order : degree;
    return sample_field(mesh, order, 1, [deg](const Point& x, double* o) { o[0] = polynomial_value(deg, x); });
  }
  if (name == "wavefront")
    return sample_field(mesh, order, 1, [](const Point& x, double* o) { o[0] = Wavefront{}(x); });
  if (name == "uniform" || name == "zero" || name == "cellular")
    return sample_field(mesh, order, d, [d, name](const Point& x, double* o) {
      Vec3 u{};
      if (name == "uniform") u[0] = 1.0;
      else if (name == "cellular") u = cellular_velocity(x);
      for (int i = 0; i < d; ++i) o[i] = u[i];
    });
  throw InvalidArgument("unknown field '" + name + "'");
}

}  // namespace fpx
