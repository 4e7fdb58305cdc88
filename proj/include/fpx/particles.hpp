#pragma once

// One-way coupled inertial particles in a periodic box. Each step
// interpolates the fluid velocity at the particles, integrates Stokes drag
// dv/dt = (u - v) / tau with second-order Adams-Bashforth, finds the new
// positions, wraps particles that left the box, and migrates particles to
// the rank that found them once more than a set fraction of a rank's
// particles live elsewhere.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fpx/engine.hpp"
#include "fpx/error.hpp"
#include "fpx/mesh.hpp"

namespace fpx {

struct ParticleOptions {
  std::size_t count = 10000;
  int steps = 1000;
  double dt = 1e-3;
  double tau = 0.05;
  std::uint64_t seed = 1;
  double migrate_fraction = 0.1;
  bool start_at_fluid_velocity = false;  // else particles start at rest
  bool keep_log = true;
};

struct Particle {
  std::uint64_t id = 0;
  Point x{};
  Vec3 v{};
  Vec3 prev_xdot{};
  Vec3 prev_vdot{};
  bool has_prev = false;
  FindRecord rec;
};

/// Per step and rank: fraction of the rank's particles found on another rank
/// (measured after the boundary update) and whether the rank migrated.
struct ParticleStepLog {
  int step = 0;
  std::vector<std::size_t> counts;
  std::vector<double> nonlocal_fraction;
  std::vector<bool> migrated;
};

struct ParticleTimings {
  double interpolate = 0.0;
  double integrate = 0.0;
  double find = 0.0;
  double boundary = 0.0;
  double migrate = 0.0;
};

struct ParticleSummary {
  std::size_t initial = 0;
  std::size_t final_count = 0;
  std::size_t removed = 0;
  std::size_t wrapped = 0;
  int migration_steps = 0;
  std::size_t migrated = 0;
  ParticleTimings timings;
  std::vector<Particle> particles;  // final state, sorted by id
  std::vector<ParticleStepLog> log;
};

/// Wraps x into [lo, hi) on every axis (hi itself is kept).
inline bool wrap_periodic(Point& x, const Aabb& box) {
  bool moved = false;
  for (int i = 0; i < box.dim; ++i) {
    const double len = box.hi[i] - box.lo[i];
    if (x[i] < box.lo[i] || x[i] > box.hi[i]) {
      double t = std::fmod(x[i] - box.lo[i], len);
      if (t < 0) t += len;
      x[i] = box.lo[i] + t;
      moved = true;
    }
  }
  return moved;
}

/// Uniform random particles in the box, split over ranks in id order.
inline std::vector<Point> seed_particles(std::size_t count, const Aabb& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> pts(count);
  for (auto& p : pts)
    for (int i = 0; i < box.dim; ++i) p[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
  return pts;
}

inline ParticleSummary run_particles(Cluster& cluster, const Field& velocity, const Aabb& box,
                                     const ParticleOptions& opt, std::vector<Point> initial = {}) {
  if (!(opt.dt > 0.0) || !(opt.tau > 0.0) || opt.steps < 0)
    throw InvalidArgument("particles need dt > 0, tau > 0 and steps >= 0");
  const int dim = box.dim;
  if (velocity.components != dim) throw FieldMismatch("velocity needs one component per dimension");
  if (initial.empty()) initial = seed_particles(opt.count, box, opt.seed);
  const int np = cluster.ranks();
  const std::size_t mesh_size = cluster.mesh_size();

  ParticleSummary sum;
  sum.initial = initial.size();
  std::vector<std::vector<Particle>> final_state(np);
  std::vector<std::size_t> removed(np, 0), wrapped(np, 0), migrated(np, 0);
  std::vector<ParticleTimings> times(np);
  std::vector<std::vector<std::pair<double, bool>>> per_step(np);
  std::vector<std::vector<std::size_t>> counts(np);
  int migration_steps = 0;

  cluster.group().run([&](RankContext& ctx) {
    const int me = ctx.rank();
    const Locator& loc = cluster.locator(me);
    const auto [eb, ee] = block_range(mesh_size, np, me);
    const FieldView fv = velocity.view(eb, ee - eb);
    auto& tm = times[me];
    using clock = std::chrono::steady_clock;

    std::vector<Particle> mine;
    {
      const auto [b, e] = block_range(initial.size(), np, me);
      for (std::size_t i = b; i < e; ++i) {
        Particle p;
        p.id = i;
        p.x = initial[i];
        mine.push_back(p);
      }
    }
    auto find_all = [&](std::vector<Particle*>& which) {
      std::vector<Point> pts(which.size());
      for (std::size_t i = 0; i < which.size(); ++i) pts[i] = which[i]->x;
      const auto recs = loc.find(ctx, pts);
      for (std::size_t i = 0; i < which.size(); ++i) which[i]->rec = recs[i];
    };
    auto interpolate_u = [&]() {
      std::vector<FindRecord> recs(mine.size());
      for (std::size_t i = 0; i < mine.size(); ++i) recs[i] = mine[i].rec;
      return loc.interpolate(ctx, fv, recs);
    };
    auto boundary = [&]() {
      const auto t0 = clock::now();
      std::vector<Particle*> moved;
      for (auto& p : mine)
        if (wrap_periodic(p.x, box)) moved.push_back(&p);
      wrapped[me] += moved.size();
      find_all(moved);
      const auto before = mine.size();
      std::erase_if(mine, [](const Particle& p) { return p.rec.code == PointCode::not_found; });
      removed[me] += before - mine.size();
      tm.boundary += detail::seconds_since(t0);
    };
    auto maybe_migrate = [&]() {
      const auto t0 = clock::now();
      std::size_t nonlocal = 0;
      for (const auto& p : mine) nonlocal += p.rec.rank != me;
      const double frac = mine.empty() ? 0.0 : static_cast<double>(nonlocal) / mine.size();
      const bool go = frac > opt.migrate_fraction;
      per_step[me].push_back({frac, go});
      counts[me].push_back(mine.size());
      const auto flags = ctx.all_gather(go ? 1 : 0);
      if (std::find(flags.begin(), flags.end(), 1) != flags.end()) {
        std::vector<std::vector<Particle>> out(np);
        if (go) {
          std::vector<Particle> stay;
          for (auto& p : mine) (p.rec.rank == me ? stay : out[p.rec.rank]).push_back(p);
          migrated[me] += mine.size() - stay.size();
          mine = std::move(stay);
        }
        for (auto& from : ctx.exchange(out)) mine.insert(mine.end(), from.begin(), from.end());
        if (me == 0) ++migration_steps;
      }
      tm.migrate += detail::seconds_since(t0);
    };

    {
      std::vector<Particle*> all;
      for (auto& p : mine) all.push_back(&p);
      const auto t0 = clock::now();
      find_all(all);
      tm.find += detail::seconds_since(t0);
      boundary();
      if (opt.start_at_fluid_velocity) {
        const auto u = interpolate_u();
        for (std::size_t i = 0; i < mine.size(); ++i)
          for (int c = 0; c < dim; ++c) mine[i].v[c] = u[i * dim + c];
      }
    }

    for (int step = 0; step < opt.steps; ++step) {
      auto t0 = clock::now();
      const auto u = interpolate_u();
      tm.interpolate += detail::seconds_since(t0);

      t0 = clock::now();
      for (std::size_t i = 0; i < mine.size(); ++i) {
        auto& p = mine[i];
        Vec3 vdot{}, xdot = p.v;
        for (int c = 0; c < dim; ++c) vdot[c] = (u[i * dim + c] - p.v[c]) / opt.tau;
        for (int c = 0; c < dim; ++c) {
          if (p.has_prev) {
            p.x[c] += opt.dt * (1.5 * xdot[c] - 0.5 * p.prev_xdot[c]);
            p.v[c] += opt.dt * (1.5 * vdot[c] - 0.5 * p.prev_vdot[c]);
          } else {
            p.x[c] += opt.dt * xdot[c];
            p.v[c] += opt.dt * vdot[c];
          }
        }
        p.prev_xdot = xdot;
        p.prev_vdot = vdot;
        p.has_prev = true;
      }
      tm.integrate += detail::seconds_since(t0);

      t0 = clock::now();
      std::vector<Particle*> all;
      for (auto& p : mine) all.push_back(&p);
      find_all(all);
      tm.find += detail::seconds_since(t0);

      boundary();
      maybe_migrate();
    }
    final_state[me] = std::move(mine);
  });

  for (int r = 0; r < np; ++r) {
    sum.particles.insert(sum.particles.end(), final_state[r].begin(), final_state[r].end());
    sum.removed += removed[r];
    sum.wrapped += wrapped[r];
    sum.migrated += migrated[r];
    sum.timings.interpolate = std::max(sum.timings.interpolate, times[r].interpolate);
    sum.timings.integrate = std::max(sum.timings.integrate, times[r].integrate);
    sum.timings.find = std::max(sum.timings.find, times[r].find);
    sum.timings.boundary = std::max(sum.timings.boundary, times[r].boundary);
    sum.timings.migrate = std::max(sum.timings.migrate, times[r].migrate);
  }
  std::sort(sum.particles.begin(), sum.particles.end(),
            [](const Particle& a, const Particle& b) { return a.id < b.id; });
  sum.final_count = sum.particles.size();
  sum.migration_steps = migration_steps;
  if (opt.keep_log)
    for (int s = 0; s < opt.steps; ++s) {
      ParticleStepLog l;
      l.step = s;
      for (int r = 0; r < np; ++r) {
        l.counts.push_back(counts[r][s]);
        l.nonlocal_fraction.push_back(per_step[r][s].first);
        l.migrated.push_back(per_step[r][s].second);
      }
      sum.log.push_back(std::move(l));
    }
  return sum;
}

}  // namespace fpx
