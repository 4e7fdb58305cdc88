#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <vector>

#include "fpx/basis.hpp"
#include "test_util.hpp"

using namespace fpx;

namespace {

// Interpolant through u evaluated by the textbook Lagrange product, used as
// an oracle independent of the library's prefix/suffix scheme.
double naive_lagrange(const std::vector<double>& z, const std::vector<double>& u, double r) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double l = 1.0;
    for (std::size_t j = 0; j < z.size(); ++j)
      if (j != i) l *= (r - z[j]) / (z[i] - z[j]);
    s += u[i] * l;
  }
  return s;
}

// Plain uniform-grid envelope check, independent of envelope_violation().
double uniform_violation(const ReferenceBasis& b, const BasisEnvelope& env, int samples) {
  std::vector<double> phi(b.size());
  double worst = -INFINITY;
  for (int s = 0; s < samples; ++s) {
    const double r = -1.0 + 2.0 * s / (samples - 1);
    b.eval(r, phi.data());
    for (int i = 0; i < b.size(); ++i) {
      worst = std::max(worst, env.lower_eval(i, r) - phi[i]);
      worst = std::max(worst, phi[i] - env.upper_eval(i, r));
    }
  }
  return worst;
}

}  // namespace

TEST(GllNodes, LowOrdersMatchClosedForms) {
  EXPECT_EQ(gll_nodes(1), (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(gll_nodes(2), (std::vector<double>{-1.0, 0.0, 1.0}));
  const auto z3 = gll_nodes(3);
  const double s = 1.0 / std::sqrt(5.0);  // roots of (15x^2 - 3)/2
  ASSERT_EQ(z3.size(), 4u);
  EXPECT_EQ(z3[0], -1.0);
  EXPECT_NEAR(z3[1], -s, 1e-15);
  EXPECT_NEAR(z3[2], s, 1e-15);
  EXPECT_EQ(z3[3], 1.0);
}

TEST(GllNodes, SortedSymmetricAndRootsOfLegendreDerivative) {
  for (int p = 1; p <= kMaxOrder; ++p) {
    const auto z = gll_nodes(p);
    ASSERT_EQ(static_cast<int>(z.size()), p + 1);
    EXPECT_EQ(z.front(), -1.0);
    EXPECT_EQ(z.back(), 1.0);
    for (int j = 0; j + 1 <= p; ++j) {
      EXPECT_LT(z[j], z[j + 1]);
      EXPECT_NEAR(z[j], -z[p - j], 1e-14);
    }
    const double scale = p * (p + 1) / 2.0;  // max |P_p'| on [-1, 1]
    for (int j = 1; j < p; ++j)
      EXPECT_LT(std::abs(boost::math::legendre_p_prime(p, z[j])) / scale, 1e-14) << "p=" << p;
  }
}

TEST(GllNodes, RejectsUnsupportedOrders) {
  EXPECT_THROW(gll_nodes(0), InvalidArgument);
  EXPECT_THROW(gll_nodes(30), InvalidArgument);
  EXPECT_THROW(ReferenceBasis(0), InvalidArgument);
}

TEST(ChebyshevPoints, MatchCosineFormula) {
  for (int m : {2, 3, 8, 21}) {
    const auto eta = chebyshev_interval_points(m);
    EXPECT_EQ(eta.front(), -1.0);
    EXPECT_EQ(eta.back(), 1.0);
    for (int j = 0; j < m; ++j)
      EXPECT_NEAR(eta[j], -std::cos(static_cast<double>(j) / (m - 1) * std::numbers::pi), 1e-15);
  }
  EXPECT_THROW(chebyshev_interval_points(1), InvalidArgument);
}

TEST(ReferenceBasis, DefaultIntervalCountIsTwiceNodeCount) {
  ReferenceBasis b(4);
  EXPECT_EQ(b.size(), 5);
  EXPECT_EQ(b.interval_count(), 10);
  EXPECT_EQ(ReferenceBasis(4, 7).interval_count(), 7);
  EXPECT_THROW(ReferenceBasis(4, 4), InvalidArgument);
}

TEST(LagrangeEval, CardinalAtNodesForEveryOrder) {
  for (int p = 1; p <= kMaxOrder; ++p) {
    ReferenceBasis b(p);
    std::vector<double> phi(b.size());
    for (int j = 0; j < b.size(); ++j) {
      b.eval(b.nodes()[j], phi.data());
      for (int i = 0; i < b.size(); ++i)
        EXPECT_LT(std::abs(phi[i] - (i == j ? 1.0 : 0.0)), 1e-13) << "p=" << p;
    }
  }
}

TEST(LagrangeEval, SecondNodeGivesUnitVector) {
  ReferenceBasis b(5);
  std::vector<double> phi(b.size());
  b.eval(b.nodes()[1], phi.data());
  for (int i = 0; i < b.size(); ++i) EXPECT_EQ(phi[i], i == 1 ? 1.0 : 0.0);
}

TEST(LagrangeEval, PartitionOfUnity) {
  fpxt::Rng rng(11);
  for (int p : {1, 2, 3, 7, 12, 20, 29}) {
    ReferenceBasis b(p);
    std::vector<double> phi(b.size()), dphi(b.size()), d2(b.size());
    for (int s = 0; s < 1000; ++s) {
      const double r = fpxt::uni(rng);
      b.eval(r, phi.data(), dphi.data(), d2.data());
      double s0 = 0, s1 = 0, s2 = 0, mag = 0;
      for (int i = 0; i < b.size(); ++i) {
        s0 += phi[i];
        s1 += dphi[i];
        s2 += d2[i];
        mag = std::max(mag, std::abs(d2[i]));
      }
      EXPECT_LT(std::abs(s0 - 1.0), 1e-12);
      EXPECT_LT(std::abs(s1), 1e-9 * std::max(1.0, mag));
      EXPECT_LT(std::abs(s2), 1e-9 * std::max(1.0, mag));
    }
  }
}

TEST(LagrangeEval, DerivativesMatchCentralDifferences) {
  fpxt::Rng rng(12);
  const double h = 1e-6;
  for (int p : {1, 2, 3, 5, 8}) {
    ReferenceBasis b(p);
    const int n = b.size();
    std::vector<double> phi(n), dphi(n), d2(n), pp(n), pm(n), dp(n), dm(n);
    for (int s = 0; s < 200; ++s) {
      const double r = fpxt::uni(rng, -0.999, 0.999);
      b.eval(r, phi.data(), dphi.data(), d2.data());
      b.eval(r + h, pp.data(), dp.data());
      b.eval(r - h, pm.data(), dm.data());
      for (int i = 0; i < n; ++i) {
        EXPECT_NEAR(dphi[i], (pp[i] - pm[i]) / (2 * h), 1e-6);
        EXPECT_NEAR(d2[i], (dp[i] - dm[i]) / (2 * h), 1e-6 * std::max(1.0, std::abs(d2[i])));
      }
    }
  }
}

TEST(LagrangeEval, AgreesWithNaiveProductForm) {
  fpxt::Rng rng(13);
  for (int p : {3, 9, 15}) {
    ReferenceBasis b(p);
    const std::vector<double> z(b.nodes().begin(), b.nodes().end());
    std::vector<double> u(b.size());
    for (auto& v : u) v = fpxt::uni(rng);
    for (int s = 0; s < 100; ++s) {
      const double r = fpxt::uni(rng);
      EXPECT_NEAR(b.interpolate(u, r), naive_lagrange(z, u, r), 1e-12);
    }
  }
}

TEST(LagrangeEval, CubicExampleEndpoints) {
  ReferenceBasis b(3);
  const std::vector<double> u{-2.4, 0.8, 1.4, -1.0};
  EXPECT_DOUBLE_EQ(b.interpolate(u, -1.0), -2.4);
  EXPECT_DOUBLE_EQ(b.interpolate(u, 1.0), -1.0);
}

TEST(LegendreCoeffs, ConstantAndLinear) {
  ReferenceBasis b(4);
  std::vector<double> c(b.size(), 5.0), lin(b.size());
  auto lp = b.legendre_coeffs(c);
  EXPECT_NEAR(lp.a0, 5.0, 1e-14);
  EXPECT_NEAR(lp.a1, 0.0, 1e-14);
  for (int i = 0; i < b.size(); ++i) lin[i] = 2.0 * b.nodes()[i];
  lp = b.legendre_coeffs(lin);
  EXPECT_NEAR(lp.a0, 0.0, 1e-14);
  EXPECT_NEAR(lp.a1, 2.0, 1e-14);
  for (int p = 1; p <= kMaxOrder; ++p) {
    ReferenceBasis bp(p);
    std::vector<double> v(bp.size());
    for (int i = 0; i < bp.size(); ++i) v[i] = -0.7 + 1.3 * bp.nodes()[i];
    const auto q = bp.legendre_coeffs(v);
    EXPECT_NEAR(q.a0, -0.7, 1e-13) << p;
    EXPECT_NEAR(q.a1, 1.3, 1e-13) << p;
  }
}

TEST(LegendreCoeffs, MatchesHighOrderGaussOracle) {
  using boost::math::quadrature::gauss;
  auto check = [](const ReferenceBasis& b, const std::vector<double>& u) {
    const auto lp = b.legendre_coeffs(u);
    const double a0 = 0.5 * gauss<double, 64>::integrate([&](double r) { return b.interpolate(u, r); }, -1.0, 1.0);
    const double a1 = 1.5 * gauss<double, 64>::integrate([&](double r) { return r * b.interpolate(u, r); }, -1.0, 1.0);
    EXPECT_NEAR(lp.a0, a0, 1e-12);
    EXPECT_NEAR(lp.a1, a1, 1e-12);
  };
  check(ReferenceBasis(3), {-2.4, 0.8, 1.4, -1.0});
  fpxt::Rng rng(14);
  for (int p : {2, 6, 11, 20}) {
    ReferenceBasis b(p);
    std::vector<double> u(b.size());
    for (auto& v : u) v = fpxt::uni(rng);
    check(b, u);
  }
}

TEST(BasisEnvelope, EndpointsExactAndOrdered) {
  for (int p : {1, 3, 6, 11}) {
    ReferenceBasis b(p);
    const auto env = build_basis_envelope(b);
    for (int i = 0; i < env.n; ++i) {
      EXPECT_EQ(env.lower_at(i, 0), i == 0 ? 1.0 : 0.0);
      EXPECT_EQ(env.upper_at(i, 0), i == 0 ? 1.0 : 0.0);
      EXPECT_EQ(env.lower_at(i, env.m - 1), i == env.n - 1 ? 1.0 : 0.0);
      EXPECT_EQ(env.upper_at(i, env.m - 1), i == env.n - 1 ? 1.0 : 0.0);
      for (int j = 0; j < env.m; ++j) EXPECT_LE(env.lower_at(i, j), env.upper_at(i, j));
    }
  }
}

TEST(BasisEnvelope, LinearBasesBoundThemselves) {
  for (int m : {2, 3, 6}) {
    ReferenceBasis b(1, m);
    const auto env = build_basis_envelope(b);
    for (int j = 0; j < m; ++j) {
      const double e = env.eta[j];
      EXPECT_NEAR(env.lower_at(0, j), 0.5 * (1 - e), 1e-15);
      EXPECT_NEAR(env.upper_at(0, j), 0.5 * (1 - e), 1e-15);
      EXPECT_NEAR(env.lower_at(1, j), 0.5 * (1 + e), 1e-15);
      EXPECT_NEAR(env.upper_at(1, j), 0.5 * (1 + e), 1e-15);
    }
  }
}

TEST(BasisEnvelope, CubicWithEightPointsIsValid) {
  ReferenceBasis b(3, 8);
  const auto env = build_basis_envelope(b);
  EXPECT_LE(uniform_violation(b, env, 10000), 1e-12);
}

TEST(BasisEnvelope, DefaultCountHoldsUnderUniformSampling) {
  for (int n = 2; n <= 12; ++n) {
    ReferenceBasis b(n - 1);
    const auto env = build_basis_envelope(b);
    EXPECT_LE(uniform_violation(b, env, 10000), 1e-12) << "N=" << n;
  }
}

TEST(BasisEnvelope, DefaultCountHoldsUpToThirtyNodes) {
  for (int n = 13; n <= kMaxNodes; ++n) EXPECT_NO_THROW(build_basis_envelope(ReferenceBasis(n - 1))) << n;
}

TEST(BasisEnvelope, MinimumIntervalCounts) {
  const std::vector<std::pair<int, int>> table{{2, 2},  {3, 4},   {4, 7},   {5, 9},
                                               {6, 11}, {7, 12},  {8, 14},  {9, 16},
                                               {10, 18}, {11, 20}, {12, 21}};
  for (const auto& [n, mmin] : table) {
    EXPECT_NO_THROW(build_basis_envelope(ReferenceBasis(n - 1, mmin))) << "N=" << n;
    if (mmin - 1 >= n) {
      EXPECT_THROW(build_basis_envelope(ReferenceBasis(n - 1, mmin - 1)), EnvelopeInvalid) << "N=" << n;
    }
  }
}

TEST(BasisEnvelope, TooFewIntervalsRejected) {
  ReferenceBasis b(5, 6);
  EXPECT_THROW(build_basis_envelope(b), EnvelopeInvalid);
  const auto env = build_basis_envelope(b, EnvelopeCheck::skip);
  EXPECT_GT(envelope_violation(b, env), kEnvelopeTolerance);
}

TEST(BasisEnvelope, IntervalLookupClamps) {
  ReferenceBasis b(3);
  const auto env = build_basis_envelope(b);
  EXPECT_EQ(env.interval_of(-1.0), 0);
  EXPECT_EQ(env.interval_of(1.0), env.m - 2);
  EXPECT_EQ(env.interval_of(-2.0), 0);
  EXPECT_EQ(env.interval_of(env.eta[3]), 3);
}
