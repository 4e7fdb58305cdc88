#pragma once

// Inverse of one element map: minimize f(r) = 1/2 |x* - x(r)|^2 over the
// reference box with a box-constrained trust-region Newton iteration.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fpx/basis.hpp"
#include "fpx/error.hpp"
#include "fpx/geometry.hpp"
#include "fpx/small_matrix.hpp"

namespace fpx {

/// Location codes, numbered as written to records files.
enum class PointCode : int { interior = 0, border = 1, not_found = 2 };

inline const char* to_string(PointCode c) {
  switch (c) {
    case PointCode::interior: return "INTERIOR";
    case PointCode::border: return "BORDER";
    default: return "NOT_FOUND";
  }
}

inline std::optional<PointCode> parse_point_code(const std::string& s) {
  if (s == "INTERIOR" || s == "0") return PointCode::interior;
  if (s == "BORDER" || s == "1") return PointCode::border;
  if (s == "NOT_FOUND" || s == "2") return PointCode::not_found;
  return std::nullopt;
}

struct NewtonSettings {
  int max_iters = 50;
  double step_tol = 1e-10;
  double trust_grow = 2.0;
  double trust_keep = 0.9;
  double trust_accept = 0.01;
  double trust_shrink = 0.25;
  double initial_trust = 1.0;
};

enum class AxisState : signed char { interior = 0, at_lower = -1, at_upper = 1 };

struct InverseMapResult {
  int ref_dim = 0;
  Vec3 r{};
  double dist = 0.0;
  int iterations = 0;
  bool converged = false;
  std::array<AxisState, 3> axes{};

  bool on_boundary() const {
    for (int a = 0; a < ref_dim; ++a)
      if (axes[a] != AxisState::interior) return true;
    return false;
  }
};

/// Objective value f = 1/2 |x* - x(r)|^2 with gradient and Hessian
/// GtG - beta * sum_i dx_i d2x_i.
struct ObjectiveDerivatives {
  double f = 0.0;
  Vec3 grad{};
  Mat3 hess{};
  Vec3 x{};
  Mat3 map_grad{};
};

inline ObjectiveDerivatives objective_derivatives(const MapEval& ev, const ElementGeometry& g,
                                                  const Point& target, bool beta) {
  ObjectiveDerivatives o;
  o.x = ev.x;
  o.map_grad = ev.grad;
  Vec3 dx{};
  for (int i = 0; i < g.dim; ++i) dx[i] = target[i] - ev.x[i];
  o.f = 0.5 * dot(dx, dx, g.dim);
  const int n = g.ref_dim;
  for (int a = 0; a < n; ++a) {
    double s = 0.0;
    for (int i = 0; i < g.dim; ++i) s -= ev.grad[i][a] * dx[i];
    o.grad[a] = s;
    for (int b = 0; b < n; ++b) {
      double h = 0.0;
      for (int i = 0; i < g.dim; ++i) h += ev.grad[i][a] * ev.grad[i][b];
      if (beta)
        for (int i = 0; i < g.dim; ++i) h -= dx[i] * ev.hess[i][a][b];
      o.hess[a][b] = h;
    }
  }
  return o;
}

inline ObjectiveDerivatives objective_derivatives(const ReferenceBasis& basis,
                                                  const ElementGeometry& g, const Point& target,
                                                  const Vec3& r, bool beta) {
  return objective_derivatives(forward_map(basis, g, r, beta), g, target, beta);
}

/// Reference coordinates of the node closest to x (first in lexicographic
/// order on ties).
inline Vec3 nearest_node_guess(const ReferenceBasis& basis, const ElementGeometry& g,
                               const Point& x) {
  int best = 0;
  double bd = INFINITY;
  const int count = g.node_count();
  for (int k = 0; k < count; ++k) {
    double d = 0.0;
    for (int c = 0; c < g.dim; ++c) {
      const double t = g.component(c)[k] - x[c];
      d += t * t;
    }
    if (d < bd) {
      bd = d;
      best = k;
    }
  }
  return node_reference_coords(basis, g.ref_dim, best);
}

namespace detail {

inline constexpr double kMaxHessianCondition = 1e12;

/// Solves h s = rhs on n axes. A failed or badly conditioned factorization
/// is retried with a growing diagonal shift; as a last resort the scaled
/// right-hand side (a steepest-descent step) is returned.
inline Vec3 solve_shifted(const Mat3& h, const Vec3& rhs, int n) {
  if (n == 0) return {};
  if (auto s = cholesky_solve(h, rhs, n, kMaxHessianCondition)) return *s;
  double tr = 0.0;
  for (int i = 0; i < n; ++i) tr += std::abs(h[i][i]);
  const double base = tr > 0.0 ? tr / n : 1.0;
  double lambda = 1e-10 * base;
  for (int k = 0; k < 30; ++k, lambda *= 100.0) {
    Mat3 hr = h;
    for (int i = 0; i < n; ++i) hr[i][i] += lambda;
    if (auto s = cholesky_solve(hr, rhs, n, kMaxHessianCondition)) return *s;
  }
  Vec3 s{};
  for (int i = 0; i < n; ++i) s[i] = rhs[i] / base;
  return s;
}

/// Shrinks the axes not marked `fixed` uniformly so that their |v|_inf <= alpha.
inline void scale_to_trust(Vec3& v, int n, double alpha, const std::array<bool, 3>& fixed) {
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    if (!fixed[i]) m = std::max(m, std::abs(v[i]));
  if (m > alpha)
    for (int i = 0; i < n; ++i)
      if (!fixed[i]) v[i] *= alpha / m;
}

/// Newton step inside the trust region alpha [-1, 1]^n and the reference
/// box offsets [lo, hi] (lo <= 0 <= hi). Axes pinned on a box face whose
/// descent direction points out of the box are held at zero. The rest are
/// solved, scaled into the trust region, clamped to the box, re-solved once
/// over the axes that stayed free, scaled and clamped again. Scaling keeps
/// the Newton direction; clamping to the trust region per axis would not.
inline Vec3 box_step(const Mat3& h, const Vec3& g, int n, const Vec3& lo, const Vec3& hi, double alpha,
                     std::array<bool, 3>& at_bound) {
  at_bound = {};
  Vec3 s{};
  bool pinned = false;
  for (int i = 0; i < n; ++i)
    if ((hi[i] == 0.0 && g[i] <= 0.0) || (lo[i] == 0.0 && g[i] >= 0.0)) {
      at_bound[i] = true;
      pinned = true;
    }
  auto clamp_box = [&](Vec3& v) {
    bool any = false;
    for (int i = 0; i < n; ++i)
      if (!at_bound[i] && (v[i] <= lo[i] || v[i] >= hi[i])) {
        v[i] = v[i] <= lo[i] ? lo[i] : hi[i];
        at_bound[i] = true;
        any = true;
      }
    return any;
  };
  bool clamped = pinned;
  if (!pinned) {
    Vec3 rhs{};
    for (int i = 0; i < n; ++i) rhs[i] = -g[i];
    s = solve_shifted(h, rhs, n);
    scale_to_trust(s, n, alpha, {});
    clamped = clamp_box(s);
  }
  if (clamped) {
    std::array<int, 3> free{};
    int nf = 0;
    for (int i = 0; i < n; ++i)
      if (!at_bound[i]) free[nf++] = i;
    if (nf > 0) {
      Mat3 hf{};
      Vec3 rf{};
      for (int a = 0; a < nf; ++a) {
        rf[a] = -g[free[a]];
        for (int i = 0; i < n; ++i)
          if (at_bound[i]) rf[a] -= h[free[a]][i] * s[i];
        for (int b = 0; b < nf; ++b) hf[a][b] = h[free[a]][free[b]];
      }
      const Vec3 sf = solve_shifted(hf, rf, nf);
      for (int a = 0; a < nf; ++a) s[free[a]] = sf[a];
      scale_to_trust(s, n, alpha, at_bound);
      clamp_box(s);
    }
  }
  return s;
}

}  // namespace detail

/// Every trial step of one inversion, for tests and diagnostics.
struct NewtonTrace {
  std::vector<Vec3> trial;         // trial iterate
  std::vector<double> residual2;   // |x* - x(trial)|^2
  std::vector<double> before2;     // |x* - x(r_l)|^2 at the current iterate
  std::vector<bool> accepted;
  std::vector<bool> exact_hessian;
};

/// Trust-region Newton from r0. The exact Hessian (beta = 1) is used only
/// after the first iteration and only while the iterate sits on a face or
/// edge of the reference box; elsewhere the Gauss-Newton matrix is used.
/// Every iterate stays inside [-1, 1]^{d_r}. Rejected trial steps count as
/// iterations.
inline InverseMapResult invert_point(const ReferenceBasis& basis, const ElementGeometry& g,
                                     const Point& target, const Vec3& r0,
                                     const NewtonSettings& s = {}, NewtonTrace* trace = nullptr) {
  for (int i = 0; i < g.dim; ++i)
    if (!std::isfinite(target[i])) throw InvalidArgument("invert_point: non-finite target");
  const int n = g.ref_dim;
  InverseMapResult res;
  res.ref_dim = n;
  Vec3 r{};
  for (int a = 0; a < n; ++a) r[a] = std::clamp(r0[a], -1.0, 1.0);

  auto residual2 = [&](const Vec3& x) {
    double f = 0.0;
    for (int i = 0; i < g.dim; ++i) f += (target[i] - x[i]) * (target[i] - x[i]);
    return f;
  };
  auto on_box_face = [&](const Vec3& v) {
    for (int a = 0; a < n; ++a)
      if (std::abs(v[a]) == 1.0) return true;
    return false;
  };

  double alpha = s.initial_trust;
  MapEval ev = forward_map(basis, g, r, false);
  bool have_hessian = false;
  double f = residual2(ev.x);
  if (!std::isfinite(f)) throw DegenerateElement("non-finite element map value");

  for (int it = 0; it < s.max_iters; ++it) {
    const bool beta = it > 0 && on_box_face(r);
    if (beta && !have_hessian) {
      ev = forward_map(basis, g, r, true);
      have_hessian = true;
    }
    const ObjectiveDerivatives od = objective_derivatives(ev, g, target, beta);
    Vec3 lo{}, hi{};
    for (int a = 0; a < n; ++a) {
      lo[a] = -1.0 - r[a];
      hi[a] = 1.0 - r[a];
    }
    std::array<bool, 3> at_bound{};
    const Vec3 step = detail::box_step(od.hess, od.grad, n, lo, hi, alpha, at_bound);
    ++res.iterations;

    Vec3 rn = r;
    double step_inf = 0.0;
    for (int a = 0; a < n; ++a) {
      rn[a] = std::clamp(r[a] + step[a], -1.0, 1.0);
      if (at_bound[a]) {
        if (step[a] == -1.0 - r[a]) rn[a] = -1.0;
        else if (step[a] == 1.0 - r[a]) rn[a] = 1.0;
      }
      step_inf = std::max(step_inf, std::abs(step[a]));
    }
    const MapEval evn = forward_map(basis, g, rn, false);
    const double fn = residual2(evn.x);
    if (!std::isfinite(fn)) throw DegenerateElement("non-finite element map value");

    auto record = [&](bool acc) {
      if (!trace) return;
      trace->trial.push_back(rn);
      trace->residual2.push_back(fn);
      trace->before2.push_back(f);
      trace->accepted.push_back(acc);
      trace->exact_hessian.push_back(beta);
    };
    if (step_inf < s.step_tol) {
      record(fn <= f);
      if (fn <= f) {
        r = rn;
        ev = evn;
        f = fn;
      }
      res.converged = true;
      break;
    }

    double quad = 0.0;
    for (int a = 0; a < n; ++a) {
      quad += od.grad[a] * step[a];
      for (int b = 0; b < n; ++b) quad += 0.5 * step[a] * od.hess[a][b] * step[b];
    }
    const double pred = -2.0 * quad;
    const double decr = f - fn;
    // Predicted change below the rounding of f: stationary to working precision.
    if (pred >= 0.0 && pred <= 16.0 * std::numeric_limits<double>::epsilon() * f) {
      record(fn <= f);
      if (fn <= f) {
        r = rn;
        ev = evn;
        f = fn;
      }
      res.converged = true;
      break;
    }
    bool accept;
    if (!(pred > 0.0)) {
      accept = false;
    } else if (decr >= s.trust_keep * pred) {
      accept = true;
      alpha *= s.trust_grow;
    } else {
      accept = decr >= s.trust_accept * pred;
    }
    record(accept);
    if (accept) {
      r = rn;
      ev = evn;
      have_hessian = false;
      f = fn;
    } else {
      alpha *= s.trust_shrink;
    }
  }

  res.r = r;
  res.dist = std::sqrt(residual2(forward_map(basis, g, r, false).x));
  for (int a = 0; a < n; ++a)
    res.axes[a] = r[a] <= -1.0 ? AxisState::at_lower
                  : r[a] >= 1.0 ? AxisState::at_upper
                                : AxisState::interior;
  return res;
}

inline InverseMapResult invert_point(const ReferenceBasis& basis, const ElementGeometry& g,
                                     const Point& target, const NewtonSettings& s = {}) {
  return invert_point(basis, g, target, nearest_node_guess(basis, g, target), s);
}

inline constexpr double kInteriorTolerance = 1e-12;

/// INTERIOR when the iteration converged strictly inside the reference box
/// and, for surface elements, the point lies within surface_eps of the
/// surface. Never returns NOT_FOUND.
inline PointCode classify(const InverseMapResult& res, bool surface, double surface_eps = 0.0) {
  if (!res.converged) return PointCode::border;
  for (int a = 0; a < res.ref_dim; ++a)
    if (!(std::abs(res.r[a]) < 1.0 - kInteriorTolerance)) return PointCode::border;
  if (surface && !(res.dist < surface_eps)) return PointCode::border;
  return PointCode::interior;
}

inline constexpr double kSurfaceRelativeEps = 1e-10;

}  // namespace fpx
