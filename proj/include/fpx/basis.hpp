#pragma once

// Reference-space machinery on [-1, 1]: Gauss-Lobatto-Legendre nodes, the
// Lagrange interpolants through them, the two-term Legendre compaction used by
// the bounding code, and piecewise-linear envelopes of the interpolants
// anchored at Chebyshev interval points.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpx/error.hpp"

namespace fpx {

inline constexpr int kMaxOrder = 29;
inline constexpr int kMaxNodes = kMaxOrder + 1;

/// P_n(x) and P_n'(x) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x;
  double d0 = 0.0, d1 = 1.0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    const double d2 = d0 + (2 * k + 1) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

/// Gauss-Lobatto-Legendre nodes of the given order, ascending. Interior
/// nodes are roots of P_order' found by Newton iteration from
/// Chebyshev-Gauss-Lobatto guesses and then symmetrized pairwise.
inline std::vector<double> gll_nodes(int order) {
  if (order < 1 || order > kMaxOrder)
    throw InvalidArgument("gll_nodes: order " + std::to_string(order) +
                          " outside [1, " + std::to_string(kMaxOrder) + "]");
  const int n = order + 1;
  std::vector<double> z(n);
  z.front() = -1.0;
  z.back() = 1.0;
  const double pp1 = static_cast<double>(order) * (order + 1);
  for (int j = 1; j < order; ++j) {
    double x = -std::cos(std::numbers::pi * j / order);
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(order, x);
      const double d2p = (2.0 * x * dp - pp1 * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) <= 1e-16) break;
    }
    z[j] = x;
  }
  for (int j = 0; j < n / 2; ++j) {
    const double a = 0.5 * (z[n - 1 - j] - z[j]);
    z[j] = -a;
    z[n - 1 - j] = a;
  }
  if (n % 2 == 1) z[n / 2] = 0.0;
  return z;
}

/// Gauss-Legendre rule with n points (exact to degree 2n - 1).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double t = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      const auto [p, d] = legendre(n, t);
      dp = d;
      const double dt = p / d;
      t -= dt;
      if (std::abs(dt) <= 1e-16) break;
    }
    dp = legendre(n, t).second;
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return {x, w};
}

/// eta_j = -cos((j / (m - 1)) pi), j = 0..m-1.
inline std::vector<double> chebyshev_interval_points(int m) {
  if (m < 2) throw InvalidArgument("chebyshev_interval_points: need at least 2 points");
  std::vector<double> eta(m);
  for (int j = 0; j < m; ++j)
    eta[j] = -std::cos(static_cast<double>(j) / (m - 1) * std::numbers::pi);
  eta.front() = -1.0;
  eta.back() = 1.0;
  return eta;
}

/// Truncated Legendre expansion u ~ a0 + a1 r.
struct LinearPart {
  double a0 = 0.0;
  double a1 = 0.0;
};

/// Lagrange interpolants through the GLL nodes of one order, plus the
/// interval points used for envelopes.
///
/// Evaluation uses the product ("first barycentric") form
/// phi_i(r) = w_i prod_{j != i} (r - z_j) with precomputed weights
/// w_i = 1 / prod_{j != i} (z_i - z_j). Prefix and suffix products carry
/// first and second derivatives, so all N values and derivatives cost O(N)
/// and node evaluations are exact (one factor is exactly zero).
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int order, int interval_count = 0)
      : order_(order), nodes_(gll_nodes(order)) {
    const int n = size();
    const int m = interval_count == 0 ? 2 * n : interval_count;
    if (m < std::max(2, n))
      throw InvalidArgument("ReferenceBasis: interval_count " + std::to_string(m) +
                            " below node count " + std::to_string(n));
    eta_ = chebyshev_interval_points(m);
    weights_.resize(n);
    for (int i = 0; i < n; ++i) {
      double d = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != i) d *= nodes_[i] - nodes_[j];
      weights_[i] = 1.0 / d;
    }
    // a_l = (2l + 1)/2 * integral(u P_l) by an n-point Gauss rule, exact
    // for the degree n integrand.
    const auto [gx, gw] = gauss_legendre(n);
    leg0_.assign(n, 0.0);
    leg1_.assign(n, 0.0);
    std::array<double, kMaxNodes> phi{};
    for (std::size_t q = 0; q < gx.size(); ++q) {
      eval(gx[q], phi.data());
      for (int i = 0; i < n; ++i) {
        leg0_[i] += 0.5 * gw[q] * phi[i];
        leg1_[i] += 1.5 * gw[q] * gx[q] * phi[i];
      }
    }
  }

  int order() const { return order_; }
  int size() const { return order_ + 1; }
  int interval_count() const { return static_cast<int>(eta_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> interval_points() const { return eta_; }

  /// Values (and optionally first/second derivatives) of all N interpolants
  /// at r. Output arrays must hold size() entries.
  void eval(double r, double* phi, double* dphi = nullptr, double* d2phi = nullptr) const {
    const int n = size();
    // prefix[k] = prod_{j<k} (r - z_j), suffix[k] = prod_{j>=k} (r - z_j),
    // each with first and second derivatives.
    std::array<std::array<double, 3>, kMaxNodes + 1> pre, suf;
    pre[0] = {1.0, 0.0, 0.0};
    for (int k = 0; k < n; ++k) pre[k + 1] = times_linear(pre[k], r - nodes_[k]);
    suf[n] = {1.0, 0.0, 0.0};
    for (int k = n - 1; k >= 0; --k) suf[k] = times_linear(suf[k + 1], r - nodes_[k]);
    for (int i = 0; i < n; ++i) {
      const auto& a = pre[i];
      const auto& b = suf[i + 1];
      phi[i] = weights_[i] * a[0] * b[0];
      if (dphi) dphi[i] = weights_[i] * (a[1] * b[0] + a[0] * b[1]);
      if (d2phi) d2phi[i] = weights_[i] * (a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2]);
    }
  }

  /// Value of sum_i u_i phi_i(r).
  double interpolate(std::span<const double> u, double r) const {
    std::array<double, kMaxNodes> phi{};
    eval(r, phi.data());
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += u[i] * phi[i];
    return s;
  }

  /// Two-term Legendre coefficients of the interpolant through u.
  LinearPart legendre_coeffs(std::span<const double> u) const {
    LinearPart out;
    for (int i = 0; i < size(); ++i) {
      out.a0 += leg0_[i] * u[i];
      out.a1 += leg1_[i] * u[i];
    }
    return out;
  }

  std::span<const double> legendre_weights0() const { return leg0_; }
  std::span<const double> legendre_weights1() const { return leg1_; }

 private:
  static std::array<double, 3> times_linear(const std::array<double, 3>& p, double d) {
    // (p * (r - z)), derivatives with respect to r.
    return {p[0] * d, p[1] * d + p[0], p[2] * d + 2.0 * p[1]};
  }

  int order_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> eta_;
  std::vector<double> leg0_, leg1_;
};

/// Piecewise-linear lower/upper envelopes of every interpolant, stored by
/// their values at the interval points (basis-major: index i * m + j).
/// Carries copies of the nodes and Legendre weights so bounding code only
/// needs the envelope.
struct BasisEnvelope {
  int n = 0;
  int m = 0;
  std::vector<double> eta;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> nodes;
  std::vector<double> leg0, leg1;

  double lower_at(int i, int j) const { return lower[static_cast<std::size_t>(i) * m + j]; }
  double upper_at(int i, int j) const { return upper[static_cast<std::size_t>(i) * m + j]; }

  /// Interval index k with eta[k] <= r <= eta[k+1] (clamped).
  int interval_of(double r) const {
    const auto it = std::upper_bound(eta.begin(), eta.end(), r);
    const int k = static_cast<int>(it - eta.begin()) - 1;
    return std::clamp(k, 0, m - 2);
  }

  /// Piecewise-linear interpolation of a row of m interval values at r.
  double interpolate_row(const double* row, double r) const {
    const int k = interval_of(r);
    const double t = (r - eta[k]) / (eta[k + 1] - eta[k]);
    return (1.0 - t) * row[k] + t * row[k + 1];
  }

  double lower_eval(int i, double r) const {
    return interpolate_row(lower.data() + static_cast<std::size_t>(i) * m, r);
  }
  double upper_eval(int i, double r) const {
    return interpolate_row(upper.data() + static_cast<std::size_t>(i) * m, r);
  }

  LinearPart legendre_coeffs(std::span<const double> u) const {
    LinearPart out;
    for (int i = 0; i < n; ++i) {
      out.a0 += leg0[i] * u[i];
      out.a1 += leg1[i] * u[i];
    }
    return out;
  }
};

inline constexpr int kEnvelopeSamples = 10000;
inline constexpr double kEnvelopeTolerance = 1e-12;

/// Largest amount by which any interpolant leaves its envelope, sampled at
/// about `samples` points spread evenly inside each interval (so the
/// clustered intervals near +-1 get as many samples as the wide central ones).
/// Non-positive means the envelope holds.
inline double envelope_violation(const ReferenceBasis& basis, const BasisEnvelope& env,
                                 int samples = kEnvelopeSamples) {
  std::array<double, kMaxNodes> phi{};
  double worst = -INFINITY;
  const int per = std::max(1, (samples + env.m - 2) / (env.m - 1));
  for (int k = 0; k + 1 < env.m; ++k) {
    for (int s = 0; s <= per; ++s) {
      const double r = env.eta[k] + (env.eta[k + 1] - env.eta[k]) * s / per;
      basis.eval(r, phi.data());
      for (int i = 0; i < env.n; ++i) {
        worst = std::max(worst, env.lower_eval(i, r) - phi[i]);
        worst = std::max(worst, phi[i] - env.upper_eval(i, r));
      }
    }
  }
  return worst;
}

enum class EnvelopeCheck { verify, skip };

/// Envelope of every basis function: at each interior interval point the
/// candidates are the function value and the two tangent lines taken at the
/// midpoints of the incident intervals, extended to the point; the most
/// conservative candidate wins. Endpoint values are exact. With
/// EnvelopeCheck::verify the result is sampled densely and EnvelopeInvalid
/// is thrown if any interpolant escapes.
inline BasisEnvelope build_basis_envelope(const ReferenceBasis& basis,
                                          EnvelopeCheck check = EnvelopeCheck::verify) {
  BasisEnvelope env;
  env.n = basis.size();
  env.m = basis.interval_count();
  env.eta.assign(basis.interval_points().begin(), basis.interval_points().end());
  env.nodes.assign(basis.nodes().begin(), basis.nodes().end());
  env.leg0.assign(basis.legendre_weights0().begin(), basis.legendre_weights0().end());
  env.leg1.assign(basis.legendre_weights1().begin(), basis.legendre_weights1().end());
  const int n = env.n, m = env.m;
  env.lower.assign(static_cast<std::size_t>(n) * m, 0.0);
  env.upper.assign(static_cast<std::size_t>(n) * m, 0.0);

  std::vector<double> at(static_cast<std::size_t>(n) * m);
  std::vector<double> mid(static_cast<std::size_t>(n) * (m - 1));
  std::vector<double> dmid(static_cast<std::size_t>(n) * (m - 1));
  std::array<double, kMaxNodes> phi{}, dphi{};
  for (int j = 0; j < m; ++j) {
    basis.eval(env.eta[j], phi.data());
    for (int i = 0; i < n; ++i) at[static_cast<std::size_t>(i) * m + j] = phi[i];
  }
  for (int k = 0; k + 1 < m; ++k) {
    basis.eval(0.5 * (env.eta[k] + env.eta[k + 1]), phi.data(), dphi.data());
    for (int i = 0; i < n; ++i) {
      mid[static_cast<std::size_t>(i) * (m - 1) + k] = phi[i];
      dmid[static_cast<std::size_t>(i) * (m - 1) + k] = dphi[i];
    }
  }
  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * m;
    const std::size_t mrow = static_cast<std::size_t>(i) * (m - 1);
    env.lower[row] = env.upper[row] = (i == 0) ? 1.0 : 0.0;
    env.lower[row + m - 1] = env.upper[row + m - 1] = (i == n - 1) ? 1.0 : 0.0;
    for (int j = 1; j + 1 < m; ++j) {
      const double hl = 0.5 * (env.eta[j] - env.eta[j - 1]);
      const double hr = 0.5 * (env.eta[j + 1] - env.eta[j]);
      const double c0 = at[row + j];
      const double c1 = mid[mrow + j - 1] + hl * dmid[mrow + j - 1];
      const double c2 = mid[mrow + j] - hr * dmid[mrow + j];
      env.lower[row + j] = std::min({c0, c1, c2});
      env.upper[row + j] = std::max({c0, c1, c2});
    }
  }
  if (check == EnvelopeCheck::verify) {
    const double v = envelope_violation(basis, env);
    if (v > kEnvelopeTolerance)
      throw EnvelopeInvalid("basis envelope with N=" + std::to_string(n) + ", M=" +
                            std::to_string(m) + " violated by " + std::to_string(v));
  }
  return env;
}

}  // namespace fpx
