#pragma once

// Whole meshes, their rank partitions, and nodal fields on them.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpx/error.hpp"
#include "fpx/geometry.hpp"

namespace fpx {

struct Mesh {
  int dim = 2;
  int ref_dim = 2;
  int order = 1;
  std::vector<ElementGeometry> elements;

  std::size_t size() const { return elements.size(); }
  bool is_surface() const { return ref_dim < dim; }
};

/// One rank's share of a mesh. global_ids[e] is the element's index in the
/// undistributed mesh.
struct MeshPartition {
  int dim = 2;
  int ref_dim = 2;
  int order = 1;
  std::vector<ElementGeometry> elements;
  std::vector<std::int64_t> global_ids;
};

/// Element range [begin, end) owned by `rank` under the contiguous block
/// partition (earlier ranks take the remainder).
inline std::pair<std::size_t, std::size_t> block_range(std::size_t count, int ranks, int rank) {
  const std::size_t base = count / ranks, extra = count % ranks;
  const std::size_t r = static_cast<std::size_t>(rank);
  const std::size_t begin = r * base + std::min(r, extra);
  return {begin, begin + base + (r < extra ? 1 : 0)};
}

inline std::vector<MeshPartition> partition_mesh(const Mesh& mesh, int ranks) {
  if (ranks < 1) throw InvalidArgument("rank count must be positive");
  std::vector<MeshPartition> parts(ranks);
  for (int r = 0; r < ranks; ++r) {
    auto& p = parts[r];
    p.dim = mesh.dim;
    p.ref_dim = mesh.ref_dim;
    p.order = mesh.order;
    const auto [b, e] = block_range(mesh.size(), ranks, r);
    for (std::size_t i = b; i < e; ++i) {
      p.elements.push_back(mesh.elements[i]);
      p.global_ids.push_back(static_cast<std::int64_t>(i));
    }
  }
  return parts;
}

/// Read-only view of per-element coefficient blocks. Each block holds
/// `components` runs of (order+1)^{ref_dim} lexicographic nodal values.
struct FieldView {
  int order = 1;
  int ref_dim = 2;
  int components = 1;
  std::span<const double> data;

  std::size_t nodes() const { return static_cast<std::size_t>(ipow(order + 1, ref_dim)); }
  std::size_t block_size() const { return nodes() * components; }
  std::size_t element_count() const { return block_size() ? data.size() / block_size() : 0; }
  std::span<const double> component(std::size_t e, int c) const {
    return data.subspan(e * block_size() + c * nodes(), nodes());
  }
};

struct Field {
  int order = 1;
  int ref_dim = 2;
  int components = 1;
  std::vector<double> data;

  std::size_t nodes() const { return static_cast<std::size_t>(ipow(order + 1, ref_dim)); }
  std::size_t block_size() const { return nodes() * components; }
  std::size_t element_count() const { return block_size() ? data.size() / block_size() : 0; }

  FieldView view() const { return {order, ref_dim, components, data}; }
  FieldView view(std::size_t first, std::size_t count) const {
    return {order, ref_dim, components,
            std::span<const double>(data).subspan(first * block_size(), count * block_size())};
  }
};

}  // namespace fpx
