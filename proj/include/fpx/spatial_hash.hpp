#pragma once

// Uniform Cartesian hash grids over the mesh: the rank-local map from cells
// to candidate elements and the rank-partitioned map from cells to candidate
// ranks. The grid itself is never stored, only its corners and resolution.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpx/bounds.hpp"
#include "fpx/error.hpp"
#include "fpx/small_matrix.hpp"
#include "fpx/transport.hpp"

namespace fpx {

inline constexpr int kMaxCellsPerAxis = 1024;
inline constexpr std::int64_t kMaxGridCells = std::int64_t{1} << 28;

using CellCoords = std::array<int, 3>;

struct CartesianGrid {
  int dim = 0;
  Vec3 lower{};
  Vec3 upper{};
  int cells = 1;  // per axis
  Vec3 size{};    // cell size per axis

  static CartesianGrid make(int dim, const Vec3& lower, const Vec3& upper, int cells) {
    if (cells < 1 || cells > kMaxCellsPerAxis)
      throw InvalidArgument("cells per axis " + std::to_string(cells) + " outside [1, " +
                            std::to_string(kMaxCellsPerAxis) + "]");
    CartesianGrid g{dim, lower, upper, cells, {}};
    if (g.cell_count() > kMaxGridCells)
      throw InvalidArgument("hash grid with " + std::to_string(g.cell_count()) + " cells is too large");
    for (int i = 0; i < dim; ++i) {
      if (!(upper[i] > lower[i]) || !std::isfinite(upper[i] - lower[i]))
        throw InvalidArgument("hash grid needs upper > lower on every axis");
      g.size[i] = (upper[i] - lower[i]) / cells;
    }
    return g;
  }

  std::int64_t cell_count() const {
    std::int64_t c = 1;
    for (int i = 0; i < dim; ++i) c *= cells;
    return c;
  }

  /// Unclamped per-axis cell coordinate; shared by point and box addressing
  /// so that a point inside a box always lands in the box's cell range.
  int axis_cell(int i, double x) const {
    const double f = std::floor((x - lower[i]) / size[i]);
    return static_cast<int>(std::clamp(f, 0.0, static_cast<double>(cells - 1)));
  }

  std::optional<CellCoords> cell_coords(const Point& x) const {
    CellCoords c{};
    for (int i = 0; i < dim; ++i) {
      if (!(x[i] >= lower[i] && x[i] <= upper[i])) return std::nullopt;
      c[i] = axis_cell(i, x[i]);
    }
    return c;
  }

  std::int64_t linear(const CellCoords& c) const {
    std::int64_t idx = 0;
    for (int i = dim - 1; i >= 0; --i) idx = idx * cells + c[i];
    return idx;
  }

  /// Lexicographic cell index (axis 0 fastest); the upper corner belongs to
  /// the last cell. Empty outside the grid.
  std::optional<std::int64_t> cell_of(const Point& x) const {
    const auto c = cell_coords(x);
    if (!c) return std::nullopt;
    return linear(*c);
  }

  /// Inclusive cell range covered by a box, clipped to the grid. Empty when
  /// the box misses the grid.
  std::optional<std::pair<CellCoords, CellCoords>> cell_range(const Aabb& box) const {
    CellCoords a{}, b{};
    for (int i = 0; i < dim; ++i) {
      if (box.hi[i] < lower[i] || box.lo[i] > upper[i] || !(box.lo[i] <= box.hi[i]))
        return std::nullopt;
      a[i] = axis_cell(i, std::max(box.lo[i], lower[i]));
      b[i] = axis_cell(i, std::min(box.hi[i], upper[i]));
    }
    return std::pair{a, b};
  }

  template <class F>
  void for_each_cell(const Aabb& box, F&& fn) const {
    const auto range = cell_range(box);
    if (!range) return;
    const auto& [a, b] = *range;
    CellCoords c = a;
    const int d = dim;
    for (c[2] = a[2]; c[2] <= (d > 2 ? b[2] : a[2]); ++c[2])
      for (c[1] = a[1]; c[1] <= (d > 1 ? b[1] : a[1]); ++c[1])
        for (c[0] = a[0]; c[0] <= b[0]; ++c[0]) fn(linear(c));
  }

  std::int64_t cells_in(const Aabb& box) const {
    const auto range = cell_range(box);
    if (!range) return 0;
    std::int64_t n = 1;
    for (int i = 0; i < dim; ++i) n *= range->second[i] - range->first[i] + 1;
    return n;
  }
};

/// ceil(count^{1/dim}) clamped to [1, kMaxCellsPerAxis].
inline int default_cells_per_axis(std::int64_t count, int dim) {
  if (count <= 1) return 1;
  int c = static_cast<int>(std::llround(std::pow(static_cast<double>(count), 1.0 / dim)));
  auto powd = [dim](std::int64_t v) {
    std::int64_t p = 1;
    for (int i = 0; i < dim; ++i) p *= v;
    return p;
  };
  while (powd(c) < count) ++c;
  while (c > 1 && powd(c - 1) >= count) --c;
  return std::clamp(c, 1, kMaxCellsPerAxis);
}

inline Aabb union_of(std::span<const Aabb> boxes, int dim) {
  Aabb u = empty_box(dim);
  for (const auto& b : boxes) u.unite(b);
  return u;
}

/// Cell -> element ids, compressed row storage over all grid cells.
struct LocalMap {
  CartesianGrid grid;
  std::vector<std::int64_t> offsets;  // cell_count + 1
  std::vector<int> elements;

  std::span<const int> cell(std::int64_t c) const {
    return {elements.data() + offsets[c], static_cast<std::size_t>(offsets[c + 1] - offsets[c])};
  }
  std::span<const int> lookup(const Point& x) const {
    const auto c = grid.cell_of(x);
    if (!c) return {};
    return cell(*c);
  }
};

/// Maps every element to all cells between the cells of its box corners.
/// cells_per_axis = 0 picks the default resolution for the element count.
inline LocalMap build_local_map(std::span<const Aabb> boxes, int cells_per_axis = 0) {
  if (boxes.empty()) throw InvalidArgument("build_local_map: no elements");
  const int dim = boxes.front().dim;
  const int cells = cells_per_axis > 0
                        ? cells_per_axis
                        : default_cells_per_axis(static_cast<std::int64_t>(boxes.size()), dim);
  const Aabb u = union_of(boxes, dim);
  LocalMap map;
  map.grid = CartesianGrid::make(dim, u.lo, u.hi, cells);
  const std::int64_t nc = map.grid.cell_count();
  map.offsets.assign(nc + 1, 0);
  for (const auto& b : boxes) map.grid.for_each_cell(b, [&](std::int64_t c) { ++map.offsets[c + 1]; });
  for (std::int64_t c = 0; c < nc; ++c) map.offsets[c + 1] += map.offsets[c];
  map.elements.resize(map.offsets[nc]);
  std::vector<std::int64_t> fill(map.offsets.begin(), map.offsets.end() - 1);
  for (std::size_t e = 0; e < boxes.size(); ++e)
    map.grid.for_each_cell(boxes[e], [&](std::int64_t c) { map.elements[fill[c]++] = static_cast<int>(e); });
  return map;
}

/// This rank's slice of the cell -> ranks map: cell i lives on rank
/// i % ranks at local row i / ranks.
struct GlobalMapShard {
  CartesianGrid grid;
  int rank = 0;
  int ranks = 1;
  std::vector<std::int64_t> offsets;
  std::vector<int> rank_lists;
  std::int64_t pairs_sent = 0;  // (cell, rank) pairs this rank emitted

  int owner(std::int64_t cell) const { return static_cast<int>(cell % ranks); }
  std::int64_t local_row(std::int64_t cell) const { return cell / ranks; }

  /// Ranks registered for a cell this rank owns.
  std::span<const int> ranks_for_cell(std::int64_t cell) const {
    if (owner(cell) != rank) throw InvalidArgument("cell not owned by this rank");
    const std::int64_t row = local_row(cell);
    return {rank_lists.data() + offsets[row],
            static_cast<std::size_t>(offsets[row + 1] - offsets[row])};
  }
};

/// Collective. The grid spans the hull of every rank's boxes; each rank sends
/// each cell its boxes touch (once) to the cell's owner, which stores sorted
/// rank lists. cells_per_axis = 0 picks the default for the global element
/// count.
inline GlobalMapShard build_global_map(RankContext& ctx, std::span<const Aabb> boxes, int dim,
                                       int cells_per_axis = 0) {
  const Aabb hull = reduce_domain_bbox(ctx, boxes.empty() ? empty_box(dim) : union_of(boxes, dim));
  const std::int64_t total = ctx.all_reduce_sum(static_cast<std::int64_t>(boxes.size()));
  if (total == 0) throw InvalidArgument("build_global_map: mesh has no elements");
  const int cells = cells_per_axis > 0 ? cells_per_axis : default_cells_per_axis(total, dim);

  GlobalMapShard shard;
  shard.grid = CartesianGrid::make(dim, hull.lo, hull.hi, cells);
  shard.rank = ctx.rank();
  shard.ranks = ctx.size();

  std::vector<std::int64_t> touched;
  for (const auto& b : boxes) shard.grid.for_each_cell(b, [&](std::int64_t c) { touched.push_back(c); });
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  std::vector<std::vector<std::int64_t>> out(ctx.size());
  for (auto c : touched) out[shard.owner(c)].push_back(c);
  shard.pairs_sent = static_cast<std::int64_t>(touched.size());
  const auto in = ctx.exchange(out);

  const std::int64_t nc = shard.grid.cell_count();
  const std::int64_t rows = nc > shard.rank ? (nc - shard.rank + shard.ranks - 1) / shard.ranks : 0;
  shard.offsets.assign(rows + 1, 0);
  for (const auto& cells_from : in)
    for (auto c : cells_from) ++shard.offsets[shard.local_row(c) + 1];
  for (std::int64_t r = 0; r < rows; ++r) shard.offsets[r + 1] += shard.offsets[r];
  shard.rank_lists.resize(shard.offsets[rows]);
  std::vector<std::int64_t> fill(shard.offsets.begin(), shard.offsets.end() - 1);
  // Sources are visited in rank order and each sends a cell at most once, so
  // every row comes out sorted and free of duplicates.
  for (int src = 0; src < ctx.size(); ++src)
    for (auto c : in[src]) shard.rank_lists[fill[shard.local_row(c)]++] = src;
  return shard;
}

/// Collective two-hop query: each point goes to the owner of its cell, which
/// answers with the cell's rank list (empty outside the grid or for an
/// unmapped cell).
inline std::vector<std::vector<int>> lookup_global(RankContext& ctx, const GlobalMapShard& shard,
                                                   std::span<const Point> points) {
  struct Query {
    std::int64_t index;
    std::int64_t cell;
  };
  std::vector<std::vector<Query>> out(ctx.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    if (const auto c = shard.grid.cell_of(points[i]))
      out[shard.owner(*c)].push_back({static_cast<std::int64_t>(i), *c});
  const auto in = ctx.exchange(out);

  struct Reply {
    std::int64_t index;
    std::vector<int> ranks;
  };
  std::vector<std::vector<Reply>> back(ctx.size());
  for (int src = 0; src < ctx.size(); ++src)
    for (const auto& q : in[src]) {
      const auto r = shard.ranks_for_cell(q.cell);
      back[src].push_back({q.index, std::vector<int>(r.begin(), r.end())});
    }
  const auto replies = ctx.exchange(back);
  std::vector<std::vector<int>> result(points.size());
  for (const auto& from : replies)
    for (const auto& r : from) result[r.index] = r.ranks;
  return result;
}

}  // namespace fpx
