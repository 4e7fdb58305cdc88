#pragma once

// Synthetic meshes: deformed Cartesian boxes, refined boxes, the spiral
// element, and boundary surfaces extracted from volume meshes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpx/basis.hpp"
#include "fpx/error.hpp"
#include "fpx/geometry.hpp"
#include "fpx/mesh.hpp"
#include "fpx/mesh_io.hpp"

namespace fpx {

enum class Deformation {
  none,
  interior,  // sinusoidal displacement that vanishes on the box boundary
  wavy,      // boundary faces bulge along their normals
};

struct MeshSpec {
  std::string generator = "cartesian-deformed";
  int dim = 3;
  int order = 3;
  std::array<int, 3> counts{4, 4, 4};
  Vec3 lower{0, 0, 0};
  Vec3 upper{1, 1, 1};
  double amplitude = 0.05;
  Deformation deformation = Deformation::interior;
  int levels = 0;
  std::string path;  // for generator "file"
};

namespace detail {

inline Vec3 deform(const MeshSpec& s, const Vec3& x) {
  if (s.deformation == Deformation::none || s.amplitude == 0.0) return x;
  Vec3 xi{}, len{};
  for (int i = 0; i < s.dim; ++i) {
    len[i] = s.upper[i] - s.lower[i];
    xi[i] = (x[i] - s.lower[i]) / len[i];
  }
  Vec3 y = x;
  const double pi = std::numbers::pi;
  if (s.deformation == Deformation::interior) {
    double p = 1.0;
    for (int j = 0; j < s.dim; ++j) p *= std::sin(2.0 * pi * xi[j]);
    for (int i = 0; i < s.dim; ++i) y[i] += s.amplitude * len[i] * p;
  } else {
    for (int i = 0; i < s.dim; ++i) {
      double p = 1.0;
      for (int j = 0; j < s.dim; ++j)
        if (j != i) p *= std::sin(pi * xi[j]);
      y[i] += s.amplitude * len[i] * p * (xi[i] - 0.5) * 2.0;
    }
  }
  return y;
}

}  // namespace detail

/// counts[0] x ... x counts[dim-1] box elements of the given order with
/// nodes placed at GLL points and then displaced by the deformation.
/// Elements are numbered with axis 0 fastest.
inline Mesh cartesian_mesh(const MeshSpec& s) {
  if (s.dim < 2 || s.dim > 3) throw InvalidArgument("box meshes need dim 2 or 3");
  if (s.order < 1 || s.order > kMaxOrder) throw InvalidArgument("order out of range");
  for (int i = 0; i < s.dim; ++i) {
    if (s.counts[i] < 1) throw InvalidArgument("element counts must be positive");
    if (!(s.upper[i] > s.lower[i])) throw InvalidArgument("box needs upper > lower");
  }
  if (std::abs(s.amplitude) > 0.2) throw InvalidArgument("deformation amplitude must be at most 0.2");
  ReferenceBasis b(s.order);
  Mesh m{s.dim, s.dim, s.order, {}};
  const int nz = s.dim == 3 ? s.counts[2] : 1;
  m.elements.reserve(static_cast<std::size_t>(s.counts[0]) * s.counts[1] * nz);
  for (int ez = 0; ez < nz; ++ez)
    for (int ey = 0; ey < s.counts[1]; ++ey)
      for (int ex = 0; ex < s.counts[0]; ++ex) {
        const std::array<int, 3> idx{ex, ey, ez};
        auto g = ElementGeometry::zeros(s.dim, s.dim, s.order);
        for (int k = 0; k < g.node_count(); ++k) {
          const Vec3 r = node_reference_coords(b, s.dim, k);
          Vec3 x{};
          for (int i = 0; i < s.dim; ++i)
            x[i] = s.lower[i] + (s.upper[i] - s.lower[i]) * (idx[i] + 0.5 * (r[i] + 1.0)) / s.counts[i];
          g.set_node(k, detail::deform(s, x));
        }
        m.elements.push_back(std::move(g));
      }
  return m;
}

/// Splits every element into 2^ref_dim children by halving its reference box;
/// children of one parent are consecutive. The geometry is unchanged.
inline Mesh refine_mesh(const Mesh& in) {
  ReferenceBasis b(in.order);
  const int dr = in.ref_dim;
  const int kids = 1 << dr;
  Mesh out{in.dim, in.ref_dim, in.order, {}};
  out.elements.reserve(in.size() * kids);
  for (const auto& parent : in.elements)
    for (int c = 0; c < kids; ++c) {
      auto g = ElementGeometry::zeros(in.dim, dr, in.order);
      for (int k = 0; k < g.node_count(); ++k) {
        Vec3 r = node_reference_coords(b, dr, k);
        for (int a = 0; a < dr; ++a) r[a] = 0.5 * (r[a] + 1.0) - ((c >> a) & 1 ? 0.0 : 1.0);
        g.set_node(k, forward_map(b, parent, r).x);
      }
      out.elements.push_back(std::move(g));
    }
  return out;
}

/// A single element swept along an Archimedean spiral: r runs along the
/// arc, s across a band of the given width. In 3D the band also gets a
/// thickness along z (third reference axis) and rises as it winds.
inline Mesh spiral_mesh(int order = 9, double turns = 1.0, double width = 0.35, int dim = 2) {
  if (order < 1 || order > kMaxOrder) throw InvalidArgument("order out of range");
  if (dim != 2 && dim != 3) throw InvalidArgument("spiral dim must be 2 or 3");
  const double pitch = 0.6;  // radial growth per turn, larger than the width
  if (!(width > 0.0 && width < pitch)) throw InvalidArgument("spiral width must be in (0, 0.6)");
  // Past one turn the arms sit side by side and the closest GLL node of a
  // point can lie on the neighbouring arm, seeding Newton in the wrong basin.
  if (!(turns > 0.0 && turns <= 1.0)) throw InvalidArgument("spiral turns must be in (0, 1]");
  ReferenceBasis b(order);
  auto g = ElementGeometry::zeros(dim, dim, order);
  const double sweep = 2.0 * std::numbers::pi * turns;
  for (int k = 0; k < g.node_count(); ++k) {
    const Vec3 r = node_reference_coords(b, dim, k);
    // r1 runs inward so the map keeps a positive Jacobian.
    const double th = 0.5 * (r[0] + 1.0) * sweep;
    const double rho = 0.5 + pitch * th / (2.0 * std::numbers::pi) - 0.5 * width * r[1];
    const double z = dim == 3 ? 0.15 * r[2] + 0.3 * th / (2.0 * std::numbers::pi) : 0.0;
    g.set_node(k, {rho * std::cos(th), rho * std::sin(th), z});
  }
  return Mesh{dim, dim, order, {std::move(g)}};
}

/// Faces of a volume mesh that belong to exactly one element, as surface
/// elements of the same order. Faces are matched by their node coordinates,
/// which conforming meshes share bit for bit.
inline Mesh extract_surface(const Mesh& vol) {
  if (vol.ref_dim != vol.dim) throw InvalidArgument("surface extraction needs a volume mesh");
  const int n = vol.order + 1;
  const int dr = vol.dim - 1;
  const int face_nodes = ipow(n, dr);
  struct Face {
    ElementGeometry g;
    int count = 0;
  };
  std::map<std::vector<double>, Face> faces;
  std::vector<std::vector<double>> order_seen;
  for (const auto& e : vol.elements)
    for (int axis = 0; axis < vol.dim; ++axis)
      for (int side = 0; side < 2; ++side) {
        auto g = ElementGeometry::zeros(vol.dim, dr, vol.order);
        for (int k = 0; k < face_nodes; ++k) {
          std::array<int, 3> fi{}, vi{};
          int rem = k;
          for (int a = 0; a < dr; ++a) {
            fi[a] = rem % n;
            rem /= n;
          }
          for (int a = 0, f = 0; a < vol.dim; ++a) vi[a] = a == axis ? side * (n - 1) : fi[f++];
          int lin = 0;
          for (int a = vol.dim - 1; a >= 0; --a) lin = lin * n + vi[a];
          g.set_node(k, e.node(lin));
        }
        std::vector<Point> pts(face_nodes);
        for (int k = 0; k < face_nodes; ++k) pts[k] = g.node(k);
        std::sort(pts.begin(), pts.end());
        std::vector<double> key;
        for (const auto& p : pts) key.insert(key.end(), p.begin(), p.begin() + vol.dim);
        auto [it, fresh] = faces.try_emplace(key, Face{std::move(g), 0});
        if (fresh) order_seen.push_back(key);
        ++it->second.count;
      }
  Mesh out{vol.dim, dr, vol.order, {}};
  for (const auto& k : order_seen)
    if (faces[k].count == 1) out.elements.push_back(std::move(faces[k].g));
  return out;
}

/// Builds the mesh a spec describes.
inline Mesh generate_mesh(const MeshSpec& s) {
  if (s.levels < 0 || s.levels > 6) throw InvalidArgument("refinement levels must be in [0, 6]");
  Mesh m;
  if (s.generator == "cartesian-deformed") {
    m = cartesian_mesh(s);
  } else if (s.generator == "refined-box") {
    m = cartesian_mesh(s);
  } else if (s.generator == "spiral") {
    m = spiral_mesh(s.order, 1.0, 0.35, s.dim);
  } else if (s.generator == "surface-extract") {
    MeshSpec v = s;
    if (v.deformation == Deformation::interior) v.deformation = Deformation::wavy;
    m = extract_surface(cartesian_mesh(v));
  } else if (s.generator == "file") {
    m = read_mesh_file(s.path);
  } else {
    throw InvalidArgument("unknown mesh generator '" + s.generator + "'");
  }
  for (int l = 0; l < s.levels; ++l) m = refine_mesh(m);
  return m;
}

/// Parses "name[,key=value...]" with keys dim, order, n (all axes), nx, ny,
/// nz, amp, deform (none|interior|wavy), levels, lo, hi (same on all axes).
/// A string naming no known generator is read as a mesh file path.
inline MeshSpec parse_mesh_spec(const std::string& text) {
  MeshSpec s;
  std::stringstream ss(text);
  std::string item;
  std::getline(ss, item, ',');
  static const char* known[] = {"cartesian-deformed", "refined-box", "spiral", "surface-extract"};
  if (std::find(std::begin(known), std::end(known), item) == std::end(known)) {
    s.generator = "file";
    s.path = text;
    return s;
  }
  s.generator = item;
  if (item == "spiral") {
    s.dim = 2;
    s.order = 9;
  }
  auto num = [&](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw InvalidArgument("bad value '" + v + "' for mesh key '" + key + "'");
    }
  };
  auto integer = [&](const std::string& key, const std::string& v) {
    const double d = num(key, v);
    if (d != std::floor(d)) throw InvalidArgument("mesh key '" + key + "' needs an integer");
    return static_cast<int>(d);
  };
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("mesh option '" + item + "' is not key=value");
    const std::string k = item.substr(0, eq), v = item.substr(eq + 1);
    if (k == "dim") s.dim = integer(k, v);
    else if (k == "order") s.order = integer(k, v);
    else if (k == "n") s.counts = {integer(k, v), integer(k, v), integer(k, v)};
    else if (k == "nx") s.counts[0] = integer(k, v);
    else if (k == "ny") s.counts[1] = integer(k, v);
    else if (k == "nz") s.counts[2] = integer(k, v);
    else if (k == "amp") s.amplitude = num(k, v);
    else if (k == "levels") s.levels = integer(k, v);
    else if (k == "lo") s.lower = {num(k, v), num(k, v), num(k, v)};
    else if (k == "hi") s.upper = {num(k, v), num(k, v), num(k, v)};
    else if (k == "deform") {
      if (v == "none") s.deformation = Deformation::none;
      else if (v == "interior") s.deformation = Deformation::interior;
      else if (v == "wavy") s.deformation = Deformation::wavy;
      else throw InvalidArgument("unknown deformation '" + v + "'");
    } else {
      throw InvalidArgument("unknown mesh option '" + k + "'");
    }
  }
  if (s.dim == 2) {
    s.counts[2] = 1;
    s.lower[2] = s.upper[2] = 0.0;
  }
  return s;
}

struct MeshSample {
  std::size_t elem = 0;
  Vec3 r{};
  Point x{};
};

/// Points drawn by picking an element uniformly, then reference coordinates
/// uniformly in [-1 + margin, 1 - margin]^{d_r}, then mapping forward.
inline std::vector<MeshSample> sample_mesh_points(const Mesh& m, std::size_t count, std::uint64_t seed,
                                                  double margin = 0.0) {
  if (m.elements.empty()) throw InvalidArgument("cannot sample an empty mesh");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
  std::uniform_real_distribution<double> coord(-1.0 + margin, 1.0 - margin);
  const ReferenceBasis b(m.order);
  std::vector<MeshSample> out(count);
  for (auto& s : out) {
    s.elem = pick(rng);
    for (int a = 0; a < m.ref_dim; ++a) s.r[a] = coord(rng);
    s.x = forward_map(b, m.elements[s.elem], s.r).x;
  }
  return out;
}

}  // namespace fpx
