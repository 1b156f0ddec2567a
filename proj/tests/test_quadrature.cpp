#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hardylab/quadrature.hpp"
#include "hardylab/test_functions.hpp"

using namespace hardylab;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double a : v)
    x[i++] = a;
  return x;
}

double bump_radial(double r, double a, double b) {
  return detail::bump_profile(r, a, b)[0];
}

// Composite Gauss-Legendre on [a, b] with many panels; the 1-D oracle.
template <class F> double dense_1d(const F &f, double a, double b, int panels = 4000) {
  const auto &g = gauss_legendre(12);
  double sum = 0;
  const double w = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double m = a + (k + 0.5) * w;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
      sum += 0.5 * w * g.weights[i] * f(m + 0.5 * w * g.nodes[i]);
  }
  return sum;
}

} // namespace

TEST(GaussLegendre, NodesAndWeights) {
  for (int n : {2, 5, 10, 31}) {
    const auto &g = gauss_legendre(n);
    double w = 0;
    for (double v : g.weights)
      w += v;
    EXPECT_NEAR(w, 2.0, 1e-14);
    for (int i = 1; i < n; ++i)
      EXPECT_LT(g.nodes[i - 1], g.nodes[i]);
  }
  EXPECT_NEAR(gauss_legendre(2).nodes[1], 1 / std::sqrt(3.0), 1e-15);
  EXPECT_THROW(gauss_legendre(0), InvalidArgument);
}

TEST(Integrate, UnitCube) {
  const auto dom = IntegrationDomain::box(Vec::Zero(3), Vec::Ones(3));
  const auto r = integrate([](const Vec &) { return 1.0; }, dom);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_LT(r.err_est, 1e-12);
}

TEST(Integrate, InverseRadiusOnAnnulus) {
  // 4 pi int_{0.5}^{1} r dr = 1.5 pi
  const auto dom = IntegrationDomain::annulus(3, 0.5, 1.0);
  const auto r = integrate([](const Vec &x) { return 1 / x.norm(); }, dom);
  EXPECT_NEAR(r.value, 1.5 * kPi, 1e-12);
}

TEST(Integrate, OddIntegrandVanishes) {
  const auto dom = IntegrationDomain::annulus(3, 0.5, 1.5);
  const auto r = refine_until([](const Vec &x) { return x[0] * bump_radial(x.norm(), 0.5, 1.5); },
                              dom, 1e-10, 20);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(Integrate, RejectsBadDomains) {
  EXPECT_THROW(IntegrationDomain::annulus(3, 1.0, 0.5), InvalidArgument);
  EXPECT_THROW(IntegrationDomain::annulus(3, 0.0, 0.5), InvalidArgument);
  EXPECT_THROW(IntegrationDomain::box(vec({0, 1}), vec({1, 1})), InvalidArgument);
  EXPECT_THROW(IntegrationDomain::annulus(4, 0.5, 1.0, 3), InvalidArgument);
  QuadratureSpec bad;
  bad.points_per_axis = 1;
  EXPECT_THROW(integrate([](const Vec &) { return 1.0; },
                         IntegrationDomain::box(Vec::Zero(1), Vec::Ones(1)), bad),
               InvalidArgument);
  // six parameter axes are beyond the tensor-rule cap
  EXPECT_THROW(integrate([](const Vec &) { return 1.0; }, IntegrationDomain::annulus(6, 0.5, 1.0)),
               InvalidArgument);
}

TEST(Integrate, NonFiniteAborts) {
  const auto dom = IntegrationDomain::box(Vec::Zero(2), Vec::Ones(2));
  try {
    integrate([](const Vec &x) { return x[0] > 0.5 ? std::nan("") : 1.0; }, dom);
    FAIL() << "expected QuadratureAbort";
  } catch (const QuadratureAbort &e) {
    EXPECT_GT(e.location[0], 0.5);
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
  }
}

TEST(RefineUntil, SmoothBumpMeetsTolerance) {
  const double a = 0.7, b = 1.9;
  const double ref =
      4 * kPi * dense_1d([&](double r) { return bump_radial(r, a, b) * r * r; }, a, b);
  const auto dom = IntegrationDomain::annulus(3, a, b);
  const auto r = refine_until([&](const Vec &x) { return bump_radial(x.norm(), a, b); }, dom,
                              1e-8, 6);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, ref, 1e-8 * ref);
}

TEST(RefineUntil, WeightAwayFromOriginConverges) {
  // |x|^{-2(p-1)} with p = 2 on an annulus: 2 pi log(2) in the plane.
  const auto dom = IntegrationDomain::annulus(2, 0.5, 1.0);
  const auto r = refine_until([](const Vec &x) { return 1 / x.squaredNorm(); }, dom, 1e-10, 20);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 2 * kPi * std::log(2.0), 1e-10);
}

TEST(RefineUntil, WeightThroughOriginIsFlagged) {
  // Same weight on a box containing the origin: non-integrable in the plane.
  const auto dom = IntegrationDomain::box(vec({-1, -1}), vec({1, 1}));
  const auto r = refine_until([](const Vec &x) { return 1 / x.squaredNorm(); }, dom, 1e-8, 12);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.err_est, 1e-8 * std::abs(r.value));
}

TEST(RefineUntil, ZeroIntegrand) {
  const auto dom = IntegrationDomain::annulus(3, 0.5, 1.0);
  const auto r = refine_until([](const Vec &) { return 0.0; }, dom, 1e-10, 10);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.err_est, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.cells, 8); // the initial partition, never refined
}

TEST(QuadratureProperties, PolynomialExactness) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k : {2, 4, 7}) {
    QuadratureSpec spec;
    spec.points_per_axis = k;
    spec.initial_splits = 1;
    for (int trial = 0; trial < 5; ++trial) {
      // product of per-axis polynomials of degree 2k - 1
      std::array<std::vector<double>, 3> c;
      for (auto &v : c) {
        v.resize(2 * k);
        for (auto &a : v)
          a = u(rng);
      }
      const Vec lo = vec({-0.3, 0.1, -1.0}), hi = vec({0.7, 1.3, 0.5});
      auto f = [&](const Vec &x) {
        double prod = 1;
        for (int i = 0; i < 3; ++i) {
          double s = 0, pw = 1;
          for (double a : c[i]) {
            s += a * pw;
            pw *= x[i];
          }
          prod *= s;
        }
        return prod;
      };
      double exact = 1;
      for (int i = 0; i < 3; ++i) {
        double s = 0;
        for (int j = 0; j < 2 * k; ++j)
          s += c[i][j] * (std::pow(hi[i], j + 1) - std::pow(lo[i], j + 1)) / (j + 1);
        exact *= s;
      }
      const auto r = integrate(f, IntegrationDomain::box(lo, hi), spec);
      EXPECT_NEAR(r.value, exact, 1e-13 * (1 + std::abs(exact)));
    }
  }
}

TEST(QuadratureProperties, Linearity) {
  const auto dom = IntegrationDomain::annulus(3, 0.6, 1.4);
  auto f = [](const Vec &x) { return std::exp(-x.squaredNorm()) * (1 + x[0]); };
  auto g = [](const Vec &x) { return std::cos(x[1]) * x.norm(); };
  const double a = 2.5, b = -0.75;
  const auto rf = refine_until(f, dom, 1e-10, 20);
  const auto rg = refine_until(g, dom, 1e-10, 20);
  const auto rh = refine_until([&](const Vec &x) { return a * f(x) + b * g(x); }, dom, 1e-10, 20);
  EXPECT_NEAR(rh.value, a * rf.value + b * rg.value,
              std::abs(a) * rf.err_est + std::abs(b) * rg.err_est + rh.err_est + 1e-14);
}

TEST(QuadratureProperties, DomainAdditivity) {
  auto f = [](const Vec &x) { return std::sin(3 * x[0]) * std::exp(x[1]) + x[0] * x[1] * x[1]; };
  const auto whole = refine_until(f, IntegrationDomain::box(vec({0, 0}), vec({2, 1})), 1e-11, 20);
  const auto left = refine_until(f, IntegrationDomain::box(vec({0, 0}), vec({1, 1})), 1e-11, 20);
  const auto right = refine_until(f, IntegrationDomain::box(vec({1, 0}), vec({2, 1})), 1e-11, 20);
  EXPECT_NEAR(whole.value, left.value + right.value,
              whole.err_est + left.err_est + right.err_est + 1e-14);
}

TEST(Annulus, ShellVolumes) {
  auto vol = [](int n, double a, double b) {
    return sphere_area(n - 1) * (std::pow(b, n) - std::pow(a, n)) / n;
  };
  EXPECT_NEAR(sphere_area(1), 2 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(2), 4 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(4), 8 * kPi * kPi / 3, 1e-13);
  auto one = [](const Vec &) { return 1.0; };
  for (int n : {1, 2, 3, 4, 5}) {
    const auto r = integrate(one, IntegrationDomain::annulus(n, 0.5, 1.2));
    EXPECT_NEAR(r.value, vol(n, 0.5, 1.2), 1e-12) << "N=" << n;
  }
  for (int n : {4, 6, 7, 8})
    for (int q = 0; q <= std::min(2, n - 2); ++q) {
      const auto r = integrate(one, IntegrationDomain::annulus(n, 0.5, 1.2, q));
      EXPECT_NEAR(r.value, vol(n, 0.5, 1.2), 1e-11) << "N=" << n << " q=" << q;
    }
}

TEST(Annulus, OneDimensionalSegments) {
  const auto r = integrate([](const Vec &x) { return x[0] * x[0] + x[0]; },
                           IntegrationDomain::annulus(1, 1.0, 2.0));
  EXPECT_NEAR(r.value, 2 * 7.0 / 3.0, 1e-13);
}

TEST(Annulus, ReducedModeMatchesFullMode) {
  // Integrand depending on x_1, x_2 and |x| only.
  auto f = [](const Vec &x) {
    return std::exp(-x.squaredNorm()) * (1 + x[0] + x[0] * x[1] + x[1] * x[1]);
  };
  for (int n : {4, 5}) {
    const auto full = refine_until(f, IntegrationDomain::annulus(n, 0.5, 1.5), 1e-10, 20);
    QuadratureSpec spec;
    const auto reduced =
        refine_until(f, IntegrationDomain::annulus(n, 0.5, 1.5, 2), 1e-10, 20, spec);
    EXPECT_NEAR(full.value, reduced.value, 1e-9 * std::abs(full.value)) << "N=" << n;
    EXPECT_LT(reduced.evaluations, full.evaluations);
  }
}

TEST(QuadratureProperties, Deterministic) {
  auto f = [](const Vec &x) { return std::exp(-3 * x.squaredNorm()) * std::cos(5 * x[0]); };
  const auto dom = IntegrationDomain::annulus(3, 0.3, 1.3);
  const auto a = refine_until(f, dom, 1e-10, 20);
  const auto b = refine_until(f, dom, 1e-10, 20);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.err_est, b.err_est);
  EXPECT_EQ(a.cells, b.cells);
}

TEST(QuadratureProperties, VectorIntegrandMatchesScalarRuns) {
  const auto dom = IntegrationDomain::annulus(3, 0.5, 1.0);
  auto v = [](const Vec &x) {
    Values r(2);
    r << 1.0, 1 / x.norm();
    return r;
  };
  const auto r = integrate_vector(v, 2, dom, QuadratureSpec{}, 10);
  EXPECT_NEAR(r.value[0], 4 * kPi / 3 * (1 - 0.125), 1e-12);
  EXPECT_NEAR(r.value[1], 1.5 * kPi, 1e-12);
}
