// fpx: command line front end for setup, find, interpolation, demos,
// particles and benchmarks on simulated ranks.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fpx/fpx.hpp"

namespace {

using namespace fpx;
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Common {
  std::string mesh;
  int ranks = 1;
  int threads = 0;
  int cells_local = 0;
  int cells_global = 0;
  double expansion = 0.10;
  std::string out;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c, bool needs_mesh) {
  auto* m = sub->add_option("--mesh", c.mesh, "generator spec (name[,key=value...]) or mesh file");
  if (needs_mesh) m->required();
  sub->add_option("--ranks", c.ranks, "simulated rank count")->check(CLI::Range(1, 1024));
  sub->add_option("--threads", c.threads, "threads per rank (default: FPX_THREADS or 1)")
      ->check(CLI::Range(1, 256));
  sub->add_option("--cells-local", c.cells_local, "local hash cells per axis (0: default)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--cells-global", c.cells_global, "global hash cells per axis (0: default)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--expansion", c.expansion, "relative bounding box padding")->check(CLI::Range(0.0, 10.0));
  sub->add_option("--out", c.out, "output file (default: stdout)");
  sub->add_option("--seed", c.seed, "random seed");
}

EngineOptions engine_options(const Common& c) {
  EngineOptions o;
  o.threads = c.threads;
  o.cells_local = c.cells_local;
  o.cells_global = c.cells_global;
  o.box.expansion = c.expansion;
  return o;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    detail::spit(c.out, text);
  }
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v > 1e9 || v != std::floor(v))
    throw CLI::ValidationError(std::string(what) + " must be a whole number in [1, 1e9]");
  return static_cast<std::size_t>(v);
}

std::vector<Point> points_of(const std::vector<MeshSample>& s) {
  std::vector<Point> p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = s[i].x;
  return p;
}

std::unique_ptr<Cluster> make_cluster(const Mesh& m, const Common& c, const std::string& cache, double* seconds) {
  const auto t0 = Clock::now();
  std::unique_ptr<Cluster> cl;
  if (cache.empty())
    cl = std::make_unique<Cluster>(m, c.ranks, engine_options(c));
  else
    cl = std::make_unique<Cluster>(m, c.ranks, engine_options(c), detail::slurp(cache));
  if (seconds) *seconds = since(t0);
  return cl;
}

std::vector<Point> query_points(const Mesh& m, const std::string& file, double npts, std::uint64_t seed) {
  if (!file.empty()) return parse_points(detail::slurp(file), m.dim);
  return points_of(sample_mesh_points(m, as_count(npts, "--npts"), seed));
}

double max_abs_error(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isnan(a[i])) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

/// Decades 10^3, 10^4, ... up to and including max_n.
std::vector<std::size_t> decades(std::size_t max_n) {
  std::vector<std::size_t> v;
  for (std::size_t n = 1000; n <= max_n; n *= 10) v.push_back(n);
  if (v.empty()) v.push_back(max_n);
  return v;
}

int cmd_setup(const Common& c) {
  const Mesh m = generate_mesh(parse_mesh_spec(c.mesh));
  double secs = 0.0;
  auto cl = make_cluster(m, c, "", &secs);
  const std::string bytes = cl->serialize_setup();
  if (c.out.empty()) throw CLI::ValidationError("setup needs --out for the cache file");
  detail::spit(c.out, bytes);
  std::printf("elements,ranks,setup_s,cache_bytes\n%zu,%d,%.6f,%zu\n", m.size(), c.ranks, secs, bytes.size());
  return 0;
}

int cmd_find(const Common& c, const std::string& points, double npts, const std::string& cache) {
  const Mesh m = generate_mesh(parse_mesh_spec(c.mesh));
  auto cl = make_cluster(m, c, cache, nullptr);
  const auto pts = query_points(m, points, npts, c.seed);
  FindReport rep;
  const auto recs = cl->find(pts, &rep);
  emit(c, records_to_csv(recs, m.ref_dim));
  std::fprintf(stderr, "points %zu, not found %zu, forwarded %zu\n", rep.points, rep.not_found, rep.forwarded);
  return 0;
}

int cmd_interp(const Common& c, const std::string& points, const std::string& records, double npts,
               const std::string& field, int order, int degree, const std::string& cache) {
  const Mesh m = generate_mesh(parse_mesh_spec(c.mesh));
  const Field f = analytic_field(field, m, order > 0 ? order : m.order, degree);
  auto cl = make_cluster(m, c, cache, nullptr);
  std::vector<double> vals;
  if (!records.empty()) {
    const auto recs = parse_records(detail::slurp(records), m.ref_dim);
    for (const auto& r : recs)
      if (r.code != PointCode::not_found && r.rank >= c.ranks)
        throw FormatError("records name rank " + std::to_string(r.rank) + "; rerun with the same --ranks");
    vals = cl->interpolate(f, recs);
  } else {
    vals = cl->find_and_interpolate(f, query_points(m, points, npts, c.seed));
  }
  emit(c, values_to_csv(vals, f.components));
  return 0;
}

int demo_spiral(const Common& c, std::size_t max_n, int order) {
  const Mesh m = c.mesh.empty() ? spiral_mesh(order > 0 ? order : 9, 1.0, 0.35, 3)
                                : generate_mesh(parse_mesh_spec(c.mesh));
  double setup = 0.0;
  auto cl = make_cluster(m, c, "", &setup);
  const Field f = analytic_field("coordinates", m, m.order);
  const ReferenceBasis basis(m.order);
  std::string out = "npts,setup_s,find_s,interp_s,mean_iters,max_iters,converged,max_err\n";
  for (std::size_t n : decades(max_n)) {
    const auto samples = sample_mesh_points(m, n, c.seed);
    const auto pts = points_of(samples);
    auto t0 = Clock::now();
    const auto recs = cl->find(pts);
    const double tf = since(t0);
    t0 = Clock::now();
    const auto vals = cl->interpolate(f, recs);
    const double ti = since(t0);
    double iters = 0.0, worst = 0.0;
    std::size_t conv = 0;
    for (const auto& smp : samples) {
      const auto res = invert_point(basis, m.elements[smp.elem], smp.x);
      iters += res.iterations;
      worst = std::max(worst, static_cast<double>(res.iterations));
      conv += res.converged;
    }
    std::vector<double> exact(m.dim * n);
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < m.dim; ++k) exact[m.dim * i + k] = pts[i][k];
    char row[256];
    std::snprintf(row, sizeof row, "%zu,%.6f,%.6f,%.6f,%.3f,%.0f,%.6f,%.3e\n", n, setup, tf, ti, iters / n, worst,
                  static_cast<double>(conv) / n, max_abs_error(vals, exact));
    out += row;
  }
  emit(c, out);
  return 0;
}

int demo_triplepoint(const Common& c, std::size_t max_n, int order, int levels) {
  MeshSpec s;
  s.generator = "refined-box";
  s.dim = 3;
  s.order = 3;
  s.counts = {16, 8, 8};
  s.levels = levels;
  const Mesh m = c.mesh.empty() ? generate_mesh(s) : generate_mesh(parse_mesh_spec(c.mesh));
  double setup = 0.0;
  auto cl = make_cluster(m, c, "", &setup);
  const Field f = analytic_field("wavefront", m, order > 0 ? order : m.order);
  std::string out = "elements,npts,setup_s,find_s,interp_s,not_found,max_err\n";
  for (std::size_t n : decades(max_n)) {
    const auto pts = points_of(sample_mesh_points(m, n, c.seed));
    auto t0 = Clock::now();
    FindReport rep;
    const auto recs = cl->find(pts, &rep);
    const double tf = since(t0);
    t0 = Clock::now();
    const auto vals = cl->interpolate(f, recs);
    const double ti = since(t0);
    std::vector<double> exact(n);
    for (std::size_t i = 0; i < n; ++i) exact[i] = Wavefront{}(pts[i]);
    char row[256];
    std::snprintf(row, sizeof row, "%zu,%zu,%.6f,%.6f,%.6f,%zu,%.3e\n", m.size(), n, setup, tf, ti, rep.not_found,
                  max_abs_error(vals, exact));
    out += row;
  }
  emit(c, out);
  return 0;
}

int demo_surface(const Common& c, std::size_t per_elem, int levels) {
  MeshSpec s;
  s.generator = "surface-extract";
  s.dim = 3;
  s.order = 3;
  s.counts = {2, 2, 2};
  s.amplitude = 0.08;
  std::string out = "elements,npts,setup_s,find_s,interp_s,interior_frac,max_err\n";
  for (int l = 0; l <= levels; ++l) {
    s.levels = l;
    const Mesh m = generate_mesh(s);
    double setup = 0.0;
    auto cl = make_cluster(m, c, "", &setup);
    const Field f = analytic_field("coordinates", m, m.order);
    const auto pts = points_of(sample_mesh_points(m, per_elem * m.size(), c.seed));
    auto t0 = Clock::now();
    const auto recs = cl->find(pts);
    const double tf = since(t0);
    t0 = Clock::now();
    const auto vals = cl->interpolate(f, recs);
    const double ti = since(t0);
    std::size_t interior = 0;
    for (const auto& r : recs) interior += r.code == PointCode::interior;
    std::vector<double> exact(3 * pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (int k = 0; k < 3; ++k) exact[3 * i + k] = pts[i][k];
    char row[256];
    std::snprintf(row, sizeof row, "%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.3e\n", m.size(), pts.size(), setup, tf, ti,
                  static_cast<double>(interior) / pts.size(), max_abs_error(vals, exact));
    out += row;
  }
  emit(c, out);
  return 0;
}

int cmd_bench(const Common& c, const std::vector<double>& npts, int order) {
  const Mesh m = generate_mesh(parse_mesh_spec(c.mesh));
  double setup = 0.0;
  auto cl = make_cluster(m, c, "", &setup);
  const int p = order > 0 ? order : m.order;
  const Field f = analytic_field("polynomial", m, p);
  std::string out = "npts,setup_s,find_s,find_local_s,find_global_s,interp_s,newton_calls,not_found,max_err\n";
  for (double v : npts) {
    const std::size_t n = as_count(v, "--npts");
    const auto pts = points_of(sample_mesh_points(m, n, c.seed));
    FindReport rep;
    auto t0 = Clock::now();
    const auto recs = cl->find(pts, &rep);
    const double tf = since(t0);
    t0 = Clock::now();
    const auto vals = cl->interpolate(f, recs);
    const double ti = since(t0);
    std::vector<double> exact(n);
    for (std::size_t i = 0; i < n; ++i) exact[i] = polynomial_value(p, pts[i]);
    char row[320];
    std::snprintf(row, sizeof row, "%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%llu,%zu,%.3e\n", n, setup, tf, rep.local_seconds,
                  rep.global_seconds, ti, static_cast<unsigned long long>(rep.newton_calls), rep.not_found,
                  max_abs_error(vals, exact));
    out += row;
  }
  emit(c, out);
  return 0;
}

struct ParticleArgs {
  std::string field = "cellular";
  double npts = 10000;
  int steps = 1000;
  double dt = 1e-3;
  double tau = 0.05;
  bool at_fluid = false;
  std::string trajectory;
};

int cmd_particles(const Common& c, const ParticleArgs& a) {
  const Mesh m = generate_mesh(parse_mesh_spec(c.mesh.empty() ? "cartesian-deformed,dim=2,order=3,n=16,lo=0,hi=2"
                                                              : c.mesh));
  Aabb box{m.dim, {}, {}};
  for (int i = 0; i < m.dim; ++i) {
    box.lo[i] = INFINITY;
    box.hi[i] = -INFINITY;
  }
  for (const auto& e : m.elements)
    for (int i = 0; i < m.dim; ++i)
      for (double v : e.component(i)) {
        box.lo[i] = std::min(box.lo[i], v);
        box.hi[i] = std::max(box.hi[i], v);
      }
  double setup = 0.0;
  auto cl = make_cluster(m, c, "", &setup);
  const Field u = analytic_field(a.field, m, m.order);
  ParticleOptions o;
  o.count = as_count(a.npts, "--npts");
  o.steps = a.steps;
  o.dt = a.dt;
  o.tau = a.tau;
  o.seed = c.seed;
  o.start_at_fluid_velocity = a.at_fluid;
  o.keep_log = false;
  const auto t0 = Clock::now();
  const auto res = run_particles(*cl, u, box, o);
  const double total = since(t0);
  std::string out =
      "particles,steps,ranks,final,removed,wrapped,migration_steps,migrated,setup_s,total_s,interp_s,integrate_s,"
      "find_s,boundary_s,migrate_s\n";
  char row[512];
  std::snprintf(row, sizeof row, "%zu,%d,%d,%zu,%zu,%zu,%d,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", res.initial,
                o.steps, c.ranks, res.final_count, res.removed, res.wrapped, res.migration_steps, res.migrated, setup,
                total, res.timings.interpolate, res.timings.integrate, res.timings.find, res.timings.boundary,
                res.timings.migrate);
  out += row;
  emit(c, out);
  if (!a.trajectory.empty()) {
    std::string t = "id";
    for (int i = 0; i < m.dim; ++i) t += ",x" + std::to_string(i);
    for (int i = 0; i < m.dim; ++i) t += ",v" + std::to_string(i);
    t += "\n";
    for (const auto& p : res.particles) {
      t += std::to_string(p.id);
      for (int i = 0; i < m.dim; ++i) t += "," + detail::fmt_double(p.x[i]);
      for (int i = 0; i < m.dim; ++i) t += "," + detail::fmt_double(p.v[i]);
      t += "\n";
    }
    detail::spit(a.trajectory, t);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpx: locate points and interpolate fields on high-order meshes"};
  app.require_subcommand(1);

  Common setup_c, find_c, interp_c, demo_c, part_c, bench_c;
  std::string points, records, cache, field = "coordinates", demo_name;
  double npts = 1000, demo_npts = 0;
  std::vector<double> bench_npts{1e3, 1e4, 1e5, 1e6};
  int order = 0, degree = -1, levels = -1;
  ParticleArgs pa;

  auto* setup = app.add_subcommand("setup", "build bounds and hash maps and write a setup cache");
  add_common(setup, setup_c, true);

  auto* find = app.add_subcommand("find", "locate points; writes a records CSV");
  add_common(find, find_c, true);
  auto* fp = find->add_option("--points", points, "points CSV (d columns)")->check(CLI::ExistingFile);
  find->add_option("--npts", npts, "random in-mesh points when --points is absent")->excludes(fp);
  find->add_option("--cache", cache, "setup cache from `fpx setup`")->check(CLI::ExistingFile);

  auto* interp = app.add_subcommand("interp", "evaluate a named field at records or points");
  add_common(interp, interp_c, true);
  auto* ip = interp->add_option("--points", points, "points CSV; runs find first")->check(CLI::ExistingFile);
  auto* ir = interp->add_option("--records", records, "records CSV from `fpx find` (same --ranks)")
                 ->check(CLI::ExistingFile);
  ip->excludes(ir);
  interp->add_option("--npts", npts, "random in-mesh points when neither file is given")->excludes(ip)->excludes(ir);
  interp->add_option("--field", field, "constant|coordinates|polynomial|wavefront|uniform|cellular|zero");
  interp->add_option("--order", order, "field order (default: mesh order)")->check(CLI::Range(1, kMaxOrder));
  interp->add_option("--degree", degree, "polynomial degree (default: field order)")->check(CLI::Range(0, 64));
  interp->add_option("--cache", cache, "setup cache from `fpx setup`")->check(CLI::ExistingFile);

  auto* demo = app.add_subcommand("demo", "timing and accuracy sweeps: spiral, triplepoint, surface");
  add_common(demo, demo_c, false);
  demo->add_option("name", demo_name, "which demo")->required()->check(CLI::IsMember({"spiral", "triplepoint",
                                                                                       "surface"}));
  demo->add_option("--npts", demo_npts, "largest point count, default 1e5 (surface: points per element, default 100)");
  demo->add_option("--order", order, "geometry order (spiral) or field order")->check(CLI::Range(1, kMaxOrder));
  demo->add_option("--levels", levels, "refinement levels")->check(CLI::Range(0, 4));

  auto* part = app.add_subcommand("particles", "inertial particles in a periodic box");
  add_common(part, part_c, false);
  part->add_option("--field", pa.field, "velocity field: uniform|cellular|zero");
  part->add_option("--npts", pa.npts, "particle count");
  part->add_option("--steps", pa.steps, "time steps")->check(CLI::NonNegativeNumber);
  part->add_option("--dt", pa.dt, "time step")->check(CLI::PositiveNumber);
  part->add_option("--tau", pa.tau, "Stokes time")->check(CLI::PositiveNumber);
  part->add_flag("--start-at-fluid", pa.at_fluid, "start particles at the fluid velocity instead of at rest");
  part->add_option("--trajectory", pa.trajectory, "write final positions and velocities to this CSV");

  auto* bench = app.add_subcommand("bench", "find and interpolate timings over a point-count sweep");
  add_common(bench, bench_c, true);
  bench->add_option("--npts", bench_npts, "comma separated point counts")->delimiter(',');
  bench->add_option("--order", order, "field order (default: mesh order)")->check(CLI::Range(1, kMaxOrder));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*setup) return cmd_setup(setup_c);
    if (*find) return cmd_find(find_c, points, npts, cache);
    if (*interp) return cmd_interp(interp_c, points, records, npts, field, order, degree, cache);
    if (*demo) {
      if (demo_name == "surface")
        return demo_surface(demo_c, demo_npts > 0 ? as_count(demo_npts, "--npts") : 100, levels < 0 ? 2 : levels);
      const std::size_t n = demo_npts > 0 ? as_count(demo_npts, "--npts") : 100000;
      if (demo_name == "spiral") return demo_spiral(demo_c, n, order);
      return demo_triplepoint(demo_c, n, order, std::max(levels, 0));
    }
    if (*part) {
      if (pa.field != "uniform" && pa.field != "cellular" && pa.field != "zero")
        throw CLI::ValidationError("--field must be uniform, cellular or zero");
      return cmd_particles(part_c, pa);
    }
    if (*bench) return cmd_bench(bench_c, bench_npts, order);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "fpx: %s\n", e.what());
    return 2;
  } catch (const fpx::Error& e) {
    std::fprintf(stderr, "fpx: error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fpx: unexpected error: %s\n", e.what());
    return 4;
  }
  return 0;
}
