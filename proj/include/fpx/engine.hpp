#pragma once

// Per-rank point location and interpolation. A Locator owns one rank's
// setup (envelopes, boxes, hash maps); find() and interpolate() are
// collective over the rank group. Cluster drives a whole group from one
// thread for callers that hold the undistributed mesh.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpx/basis.hpp"
#include "fpx/bounds.hpp"
#include "fpx/error.hpp"
#include "fpx/geometry.hpp"
#include "fpx/invmap.hpp"
#include "fpx/mesh.hpp"
#include "fpx/parallel.hpp"
#include "fpx/serialize.hpp"
#include "fpx/spatial_hash.hpp"
#include "fpx/transport.hpp"

namespace fpx {

struct EngineOptions {
  BoxOptions box;
  int interval_count = 0;  // 0: twice the node count
  int cells_local = 0;     // 0: default resolution
  int cells_global = 0;
  NewtonSettings newton;
  bool use_obb = true;
  double surface_eps = 0.0;  // absolute surface threshold when > 0
  double surface_eps_rel = kSurfaceRelativeEps;  // else times the element box diagonal
  int threads = 0;  // 0: default_thread_count()
};

/// Where a point was found. For NOT_FOUND the rank, element and distance are
/// sentinels (-1, -1, NaN).
struct FindRecord {
  PointCode code = PointCode::not_found;
  int rank = -1;
  int elem = -1;  // local index on `rank`
  std::int64_t global_elem = -1;
  Vec3 r{};
  double dist = std::numeric_limits<double>::quiet_NaN();
};

/// Strict preference used when merging candidates: code, then distance, then
/// (rank, element).
inline bool better_record(const FindRecord& a, const FindRecord& b) {
  if (a.code != b.code) return static_cast<int>(a.code) < static_cast<int>(b.code);
  if (a.code == PointCode::not_found) return false;
  if (a.dist != b.dist) return a.dist < b.dist;
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.elem < b.elem;
}

struct FindReport {
  std::size_t points = 0;
  std::size_t local_interior = 0;
  std::size_t forwarded = 0;
  std::size_t not_found = 0;
  std::uint64_t newton_calls = 0;
  double local_seconds = 0.0;
  double global_seconds = 0.0;

  void merge(const FindReport& o) {
    points += o.points;
    local_interior += o.local_interior;
    forwarded += o.forwarded;
    not_found += o.not_found;
    newton_calls += o.newton_calls;
    local_seconds = std::max(local_seconds, o.local_seconds);
    global_seconds = std::max(global_seconds, o.global_seconds);
  }
};

struct InterpReport {
  std::size_t not_found = 0;
  std::size_t remote = 0;
  double seconds = 0.0;

  void merge(const InterpReport& o) {
    not_found += o.not_found;
    remote += o.remote;
    seconds = std::max(seconds, o.seconds);
  }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// All field components of element e at r, evaluating the basis once.
inline void eval_field(const ReferenceBasis& basis, const FieldView& f, std::size_t e, const Vec3& r,
                       double* out) {
  const int n = basis.size();
  std::array<std::array<double, kMaxNodes>, 3> phi{};
  for (int a = 0; a < f.ref_dim; ++a) basis.eval(r[a], phi[a].data());
  for (int c = 0; c < f.components; ++c) {
    const double* u = f.component(e, c).data();
    double s = 0.0;
    if (f.ref_dim == 1) {
      for (int i = 0; i < n; ++i) s += u[i] * phi[0][i];
    } else if (f.ref_dim == 2) {
      for (int j = 0; j < n; ++j) {
        double t = 0.0;
        for (int i = 0; i < n; ++i) t += u[j * n + i] * phi[0][i];
        s += t * phi[1][j];
      }
    } else {
      for (int k = 0; k < n; ++k) {
        double t2 = 0.0;
        for (int j = 0; j < n; ++j) {
          double t = 0.0;
          const double* row = u + (k * n + j) * n;
          for (int i = 0; i < n; ++i) t += row[i] * phi[0][i];
          t2 += t * phi[1][j];
        }
        s += t2 * phi[2][k];
      }
    }
    out[c] = s;
  }
}

struct RoutedPoint {
  std::int64_t index;
  int origin;
  Point x;
};

struct RemoteFind {
  std::int64_t index;
  FindRecord rec;
};

struct EvalRequest {
  std::int64_t index;
  int elem;
  Vec3 r;
};

struct EvalReply {
  std::int64_t index;
  std::vector<double> values;
};

inline constexpr char kSetupMagic[8] = {'F', 'P', 'X', 'S', 'E', 'T', 'U', 'P'};
inline constexpr std::uint32_t kSetupVersion = 1;

}  // namespace detail

class Locator {
 public:
  /// Collective setup over the group.
  Locator(RankContext& ctx, MeshPartition part, EngineOptions opt = {})
      : part_(std::move(part)),
        opt_(opt),
        basis_(check_order(part_.order), opt_.interval_count),
        env_(build_basis_envelope(basis_)) {
    rank_ = ctx.rank();
    ranks_ = ctx.size();
    build_local();
    global_ = build_global_map(ctx, aabbs_, part_.dim, opt_.cells_global);
  }

  /// Restores a setup written by serialize() for the same partition.
  Locator(MeshPartition part, EngineOptions opt, std::string_view cache)
      : part_(std::move(part)),
        opt_(opt),
        basis_(check_order(part_.order), opt_.interval_count),
        env_(build_basis_envelope(basis_)) {
    for (const auto& g : part_.elements) check_element(g);
    load(cache);
  }

  Locator(const Locator&) = delete;
  Locator& operator=(const Locator&) = delete;

  int rank() const { return rank_; }
  int ranks() const { return ranks_; }
  const MeshPartition& partition() const { return part_; }
  const EngineOptions& options() const { return opt_; }
  const ReferenceBasis& basis() const { return basis_; }
  const BasisEnvelope& envelope() const { return env_; }
  std::span<const Aabb> aabbs() const { return aabbs_; }
  std::span<const Obb> obbs() const { return obbs_; }
  const LocalMap& local_map() const { return local_; }
  const GlobalMapShard& global_map() const { return global_; }
  std::uint64_t newton_calls() const { return newton_calls_.load(); }
  bool empty() const { return part_.elements.empty(); }
  int threads() const { return opt_.threads > 0 ? opt_.threads : default_thread_count(); }

  /// Best local match for x: candidates from the local map pass the AABB
  /// and OBB filters and are inverted in ascending id order; the first
  /// INTERIOR wins, otherwise the smallest distance.
  FindRecord search_local(const Point& x) const {
    FindRecord best;
    if (empty()) return best;
    for (int e : local_.lookup(x)) {
      if (!aabb_contains(aabbs_[e], x)) continue;
      if (opt_.use_obb && !obb_contains(obbs_[e], x)) continue;
      const auto res = invert_point(basis_, part_.elements[e], x, opt_.newton);
      newton_calls_.fetch_add(1, std::memory_order_relaxed);
      FindRecord rec;
      rec.code = classify(res, part_.ref_dim < part_.dim, surface_eps_[e]);
      rec.rank = rank_;
      rec.elem = e;
      rec.global_elem = part_.global_ids.empty() ? e : part_.global_ids[e];
      rec.r = res.r;
      rec.dist = res.dist;
      if (rec.code == PointCode::interior) return rec;
      if (better_record(rec, best)) best = rec;
    }
    return best;
  }

  /// Collective. Points not found INTERIOR locally go to the owner of their
  /// global cell, which forwards them to every other rank registered there;
  /// those ranks answer the origin directly and the best answer is kept.
  std::vector<FindRecord> find(RankContext& ctx, std::span<const Point> points,
                               FindReport* report = nullptr) const {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t calls0 = newton_calls();
    std::vector<FindRecord> out(points.size());
    parallel_for(points.size(), threads(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) out[i] = search_local(points[i]);
    });
    FindReport rep;
    rep.points = points.size();
    rep.local_seconds = detail::seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();

    if (ctx.size() > 1) {
      std::vector<std::vector<detail::RoutedPoint>> to_owner(ctx.size());
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (out[i].code == PointCode::interior) continue;
        if (const auto c = global_.grid.cell_of(points[i])) {
          to_owner[global_.owner(*c)].push_back({static_cast<std::int64_t>(i), rank_, points[i]});
          ++rep.forwarded;
        }
      }
      const auto at_owner = ctx.exchange(to_owner);

      std::vector<std::vector<detail::RoutedPoint>> to_cand(ctx.size());
      for (const auto& from : at_owner)
        for (const auto& p : from) {
          const auto c = global_.grid.cell_of(p.x);
          for (int q : global_.ranks_for_cell(*c))
            if (q != p.origin) to_cand[q].push_back(p);
        }
      const auto at_cand = ctx.exchange(to_cand);

      std::vector<const detail::RoutedPoint*> work;
      for (const auto& from : at_cand)
        for (const auto& p : from) work.push_back(&p);
      std::vector<FindRecord> found(work.size());
      parallel_for(work.size(), threads(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) found[i] = search_local(work[i]->x);
      });
      std::vector<std::vector<detail::RemoteFind>> back(ctx.size());
      for (std::size_t i = 0; i < work.size(); ++i)
        if (found[i].code != PointCode::not_found)
          back[work[i]->origin].push_back({work[i]->index, found[i]});
      const auto answers = ctx.exchange(back);
      for (const auto& from : answers)
        for (const auto& a : from)
          if (better_record(a.rec, out[a.index])) out[a.index] = a.rec;
    }
    rep.global_seconds = detail::seconds_since(t1);
    for (const auto& r : out) {
      if (r.code == PointCode::not_found) ++rep.not_found;
      if (r.code == PointCode::interior && r.rank == rank_) ++rep.local_interior;
    }
    rep.newton_calls = newton_calls() - calls0;
    if (report) *report = rep;
    return out;
  }

  /// Collective. Evaluates the field at every record; records found on other
  /// ranks are evaluated there. NOT_FOUND records give NaN.
  std::vector<double> interpolate(RankContext& ctx, const FieldView& f,
                                  std::span<const FindRecord> records,
                                  InterpReport* report = nullptr) const {
    const auto t0 = std::chrono::steady_clock::now();
    check_field(f);
    const int nc = f.components;
    const ReferenceBasis fb(f.order, std::max(2, f.order + 1));
    std::vector<double> out(records.size() * nc, std::numeric_limits<double>::quiet_NaN());
    InterpReport rep;
    std::vector<std::vector<detail::EvalRequest>> req(ctx.size());
    std::vector<std::size_t> local;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (r.code == PointCode::not_found) {
        ++rep.not_found;
      } else if (r.rank == rank_) {
        local.push_back(i);
      } else {
        if (r.rank < 0 || r.rank >= ctx.size()) throw InvalidArgument("record names an unknown rank");
        req[r.rank].push_back({static_cast<std::int64_t>(i), r.elem, r.r});
        ++rep.remote;
      }
    }
    parallel_for(local.size(), threads(), [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        const auto i = local[k];
        check_elem(records[i].elem);
        detail::eval_field(fb, f, records[i].elem, records[i].r, out.data() + i * nc);
      }
    });
    if (ctx.size() > 1) {
      const auto incoming = ctx.exchange(req);
      std::vector<std::vector<detail::EvalReply>> replies(ctx.size());
      for (int src = 0; src < ctx.size(); ++src) {
        replies[src].resize(incoming[src].size());
        parallel_for(incoming[src].size(), threads(), [&](std::size_t b, std::size_t e) {
          for (std::size_t k = b; k < e; ++k) {
            const auto& q = incoming[src][k];
            check_elem(q.elem);
            replies[src][k].index = q.index;
            replies[src][k].values.resize(nc);
            detail::eval_field(fb, f, q.elem, q.r, replies[src][k].values.data());
          }
        });
      }
      const auto values = ctx.exchange(replies);
      for (const auto& from : values)
        for (const auto& v : from) std::copy(v.values.begin(), v.values.end(), out.begin() + v.index * nc);
    }
    rep.seconds = detail::seconds_since(t0);
    if (report) *report = rep;
    return out;
  }

  std::vector<double> find_and_interpolate(RankContext& ctx, const FieldView& f,
                                           std::span<const Point> points,
                                           std::vector<FindRecord>* records = nullptr) const {
    auto recs = find(ctx, points);
    auto vals = interpolate(ctx, f, recs);
    if (records) *records = std::move(recs);
    return vals;
  }

  /// Versioned little-endian image of the setup (boxes, envelope, maps).
  std::string serialize() const {
    ByteWriter w;
    w.put_bytes(std::string_view(detail::kSetupMagic, 8));
    w.put<std::uint32_t>(detail::kSetupVersion);
    for (int v : {part_.dim, part_.ref_dim, part_.order, env_.m, rank_, ranks_})
      w.put<std::int32_t>(v);
    w.put<std::uint64_t>(part_.elements.size());
    w.put_all(env_.lower);
    w.put_all(env_.upper);
    const int d = part_.dim;
    for (std::size_t e = 0; e < aabbs_.size(); ++e) {
      for (int i = 0; i < d; ++i) w.put(aabbs_[e].lo[i]);
      for (int i = 0; i < d; ++i) w.put(aabbs_[e].hi[i]);
      const auto& o = obbs_[e];
      w.put<std::uint8_t>(o.valid ? 1 : 0);
      for (int i = 0; i < d; ++i) w.put(o.center[i]);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) w.put(o.inverse[i][j]);
      w.put(surface_eps_[e]);
    }
    put_grid(w, local_.grid);
    w.put_all(local_.offsets);
    w.put_all(local_.elements);
    put_grid(w, global_.grid);
    w.put_all(global_.offsets);
    w.put_all(global_.rank_lists);
    return w.take();
  }

 private:
  static int check_order(int order) {
    if (order < 1 || order > kMaxOrder) throw InvalidArgument("mesh order " + std::to_string(order) + " unsupported");
    return order;
  }

  void check_element(const ElementGeometry& g) const {
    validate(g);
    if (g.dim != part_.dim || g.ref_dim != part_.ref_dim || g.order != part_.order)
      throw InvalidArgument("element shape differs from the mesh");
  }

  void check_elem(int e) const {
    if (e < 0 || static_cast<std::size_t>(e) >= part_.elements.size())
      throw InvalidArgument("record names an unknown element");
  }

  void check_field(const FieldView& f) const {
    if (f.ref_dim != part_.ref_dim || f.components < 1 || f.order < 1 || f.order > kMaxOrder)
      throw FieldMismatch("field shape does not match the mesh");
    if (f.data.size() != f.block_size() * part_.elements.size())
      throw FieldMismatch("field has " + std::to_string(f.data.size()) + " values, expected " +
                          std::to_string(f.block_size() * part_.elements.size()));
  }

  void build_local() {
    const std::size_t n = part_.elements.size();
    for (const auto& g : part_.elements) check_element(g);
    aabbs_.resize(n);
    obbs_.resize(n);
    surface_eps_.assign(n, 0.0);
    parallel_for(n, threads(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        aabbs_[i] = element_aabb(env_, part_.elements[i], opt_.box);
        obbs_[i] = element_obb(basis_, env_, part_.elements[i], opt_.box);
        surface_eps_[i] = opt_.surface_eps > 0.0 ? opt_.surface_eps
                                                 : opt_.surface_eps_rel * aabbs_[i].diagonal();
      }
    });
    if (n > 0) local_ = build_local_map(aabbs_, opt_.cells_local);
  }

  static void put_grid(ByteWriter& w, const CartesianGrid& g) {
    w.put<std::int32_t>(g.dim);
    w.put<std::int32_t>(g.cells);
    for (int i = 0; i < g.dim; ++i) w.put(g.lower[i]);
    for (int i = 0; i < g.dim; ++i) w.put(g.upper[i]);
  }

  static CartesianGrid get_grid(ByteReader& r) {
    const int dim = r.get<std::int32_t>();
    const int cells = r.get<std::int32_t>();
    if (dim < 0 || dim > 3) throw FormatError("setup cache: bad grid dimension");
    if (dim == 0) return {};
    Vec3 lo{}, hi{};
    for (int i = 0; i < dim; ++i) lo[i] = r.get<double>();
    for (int i = 0; i < dim; ++i) hi[i] = r.get<double>();
    try {
      return CartesianGrid::make(dim, lo, hi, cells);
    } catch (const InvalidArgument& e) {
      throw FormatError(std::string("setup cache: ") + e.what());
    }
  }

  void load(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.get_bytes(8) != std::string_view(detail::kSetupMagic, 8)) throw FormatError("not a setup cache");
    if (r.get<std::uint32_t>() != detail::kSetupVersion) throw FormatError("setup cache version mismatch");
    const int dim = r.get<std::int32_t>(), ref_dim = r.get<std::int32_t>(), order = r.get<std::int32_t>();
    const int m = r.get<std::int32_t>();
    rank_ = r.get<std::int32_t>();
    ranks_ = r.get<std::int32_t>();
    const auto n = r.get<std::uint64_t>();
    if (dim != part_.dim || ref_dim != part_.ref_dim || order != part_.order || m != env_.m ||
        n != part_.elements.size() || ranks_ < 1 || rank_ < 0 || rank_ >= ranks_)
      throw FormatError("setup cache does not match the mesh partition");
    const auto lower = r.get_all<double>(), upper = r.get_all<double>();
    if (lower != env_.lower || upper != env_.upper) throw FormatError("setup cache envelope differs");
    aabbs_.resize(n);
    obbs_.resize(n);
    surface_eps_.resize(n);
    for (std::size_t e = 0; e < n; ++e) {
      aabbs_[e].dim = dim;
      for (int i = 0; i < dim; ++i) aabbs_[e].lo[i] = r.get<double>();
      for (int i = 0; i < dim; ++i) aabbs_[e].hi[i] = r.get<double>();
      auto& o = obbs_[e];
      o.dim = dim;
      o.valid = r.get<std::uint8_t>() != 0;
      for (int i = 0; i < dim; ++i) o.center[i] = r.get<double>();
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) o.inverse[i][j] = r.get<double>();
      surface_eps_[e] = r.get<double>();
    }
    local_.grid = get_grid(r);
    local_.offsets = r.get_all<std::int64_t>();
    local_.elements = r.get_all<int>();
    global_.grid = get_grid(r);
    global_.rank = rank_;
    global_.ranks = ranks_;
    global_.offsets = r.get_all<std::int64_t>();
    global_.rank_lists = r.get_all<int>();
    if (r.remaining() != 0) throw FormatError("setup cache has trailing bytes");
    auto check_csr = [](const std::vector<std::int64_t>& off, std::size_t rows, std::size_t values,
                        auto&& in_range) {
      if (off.size() != rows + 1 || off.front() != 0 || static_cast<std::size_t>(off.back()) != values)
        return false;
      for (std::size_t i = 0; i + 1 < off.size(); ++i)
        if (off[i] > off[i + 1]) return false;
      return in_range();
    };
    const bool local_ok =
        n == 0 || check_csr(local_.offsets, local_.grid.cell_count(), local_.elements.size(), [&] {
          return std::all_of(local_.elements.begin(), local_.elements.end(),
                             [&](int e) { return e >= 0 && static_cast<std::size_t>(e) < n; });
        });
    const std::int64_t nc = global_.grid.cell_count();
    const std::int64_t rows = nc > rank_ ? (nc - rank_ + ranks_ - 1) / ranks_ : 0;
    const bool global_ok = check_csr(global_.offsets, rows, global_.rank_lists.size(), [&] {
      return std::all_of(global_.rank_lists.begin(), global_.rank_lists.end(),
                         [&](int q) { return q >= 0 && q < ranks_; });
    });
    if (!local_ok || !global_ok) throw FormatError("setup cache maps are inconsistent");
  }

  MeshPartition part_;
  EngineOptions opt_;
  ReferenceBasis basis_;
  BasisEnvelope env_;
  int rank_ = 0;
  int ranks_ = 1;
  std::vector<Aabb> aabbs_;
  std::vector<Obb> obbs_;
  std::vector<double> surface_eps_;
  LocalMap local_;
  GlobalMapShard global_;
  mutable std::atomic<std::uint64_t> newton_calls_{0};
};

/// A rank group plus one Locator per rank over a block-partitioned mesh.
/// Query points are split into contiguous blocks, one per rank, and results
/// come back in input order.
class Cluster {
 public:
  Cluster(const Mesh& mesh, int ranks, EngineOptions opt = {})
      : group_(ranks), mesh_size_(mesh.size()), locators_(ranks) {
    auto parts = partition_mesh(mesh, ranks);
    group_.run([&](RankContext& ctx) {
      locators_[ctx.rank()] = std::make_unique<Locator>(ctx, std::move(parts[ctx.rank()]), opt);
    });
  }

  /// Restores the per-rank setups written by serialize_setup().
  Cluster(const Mesh& mesh, int ranks, EngineOptions opt, std::string_view cache)
      : group_(ranks), mesh_size_(mesh.size()), locators_(ranks) {
    ByteReader r(cache);
    if (r.get<std::uint32_t>() != static_cast<std::uint32_t>(ranks))
      throw FormatError("setup cache was written for a different rank count");
    auto parts = partition_mesh(mesh, ranks);
    for (int k = 0; k < ranks; ++k) {
      const auto len = r.get<std::uint64_t>();
      if (len > r.remaining()) throw FormatError("setup cache is truncated");
      locators_[k] = std::make_unique<Locator>(std::move(parts[k]), opt, r.get_bytes(len));
      if (locators_[k]->rank() != k || locators_[k]->ranks() != ranks)
        throw FormatError("setup cache ranks are out of order");
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in setup cache");
  }

  int ranks() const { return group_.size(); }
  std::size_t mesh_size() const { return mesh_size_; }
  RankGroup& group() { return group_; }
  const Locator& locator(int r) const { return *locators_[r]; }

  std::vector<FindRecord> find(std::span<const Point> points, FindReport* report = nullptr) {
    std::vector<FindRecord> out(points.size());
    std::vector<FindReport> reps(ranks());
    group_.run([&](RankContext& ctx) {
      const auto [b, e] = block_range(points.size(), ctx.size(), ctx.rank());
      auto recs = locators_[ctx.rank()]->find(ctx, points.subspan(b, e - b), &reps[ctx.rank()]);
      std::copy(recs.begin(), recs.end(), out.begin() + b);
    });
    if (report) {
      *report = {};
      for (const auto& r : reps) report->merge(r);
    }
    return out;
  }

  std::vector<double> interpolate(const Field& f, std::span<const FindRecord> records,
                                  InterpReport* report = nullptr) {
    if (f.element_count() != mesh_size_ || f.data.size() != f.block_size() * mesh_size_)
      throw FieldMismatch("field covers " + std::to_string(f.element_count()) + " elements, mesh has " +
                          std::to_string(mesh_size_));
    std::vector<double> out(records.size() * f.components);
    std::vector<InterpReport> reps(ranks());
    group_.run([&](RankContext& ctx) {
      const auto [eb, ee] = block_range(mesh_size_, ctx.size(), ctx.rank());
      const auto [b, e] = block_range(records.size(), ctx.size(), ctx.rank());
      auto vals = locators_[ctx.rank()]->interpolate(ctx, f.view(eb, ee - eb),
                                                     records.subspan(b, e - b), &reps[ctx.rank()]);
      std::copy(vals.begin(), vals.end(), out.begin() + b * f.components);
    });
    if (report) {
      *report = {};
      for (const auto& r : reps) report->merge(r);
    }
    return out;
  }

  std::vector<double> find_and_interpolate(const Field& f, std::span<const Point> points,
                                           std::vector<FindRecord>* records = nullptr) {
    auto recs = find(points);
    auto vals = interpolate(f, recs);
    if (records) *records = std::move(recs);
    return vals;
  }

  std::uint64_t newton_calls() const {
    std::uint64_t s = 0;
    for (const auto& l : locators_) s += l->newton_calls();
    return s;
  }

  /// Concatenated per-rank setup images, each prefixed by its length.
  std::string serialize_setup() const {
    ByteWriter w;
    w.put<std::uint32_t>(static_cast<std::uint32_t>(locators_.size()));
    for (const auto& l : locators_) {
      const auto s = l->serialize();
      w.put<std::uint64_t>(s.size());
      w.put_bytes(s);
    }
    return w.take();
  }

 private:
  RankGroup group_;
  std::size_t mesh_size_;
  std::vector<std::unique_ptr<Locator>> locators_;
};

}  // namespace fpx
