#include <gtest/gtest.h>

#include <Eigen/QR>
#include <cmath>
#include <random>

#include "hardylab/cp.hpp"

using namespace hardylab;

namespace {

ComplexVec random_cvec(std::mt19937_64 &rng, int l, double scale = 1.0) {
  std::normal_distribution<double> n(0, 1);
  ComplexVec v(l);
  for (int i = 0; i < l; ++i)
    v[i] = scale * Complex(n(rng), n(rng));
  return v;
}

CMat random_unitary(std::mt19937_64 &rng, int l) {
  std::normal_distribution<double> n(0, 1);
  CMat a(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j)
      a(i, j) = Complex(n(rng), n(rng));
  Eigen::HouseholderQR<CMat> qr(a);
  return qr.householderQ() * CMat::Identity(l, l);
}

ComplexVec cv(std::initializer_list<Complex> v) {
  ComplexVec x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (auto a : v)
    x[i++] = a;
  return x;
}

} // namespace

TEST(CpEval, Examples) {
  std::mt19937_64 rng(1);
  for (double p : {1.2, 2.0, 3.7}) {
    const ComplexVec xi = random_cvec(rng, 2);
    EXPECT_EQ(cp_eval(p, xi, ComplexVec::Zero(2)), 0.0);
    EXPECT_NEAR(cp_eval(p, xi, xi), std::pow(xi.norm(), p), 1e-14);
  }
  EXPECT_NEAR(cp_eval(2.0, cv({1.0, 0.0}), cv({0.3, 0.4})), 0.25, 1e-15);
  EXPECT_THROW(cp_eval(2.0, cv({1.0}), cv({1.0, 0.0})), InvalidArgument);
}

TEST(CpEval, MatchesDefinitionAwayFromCancellation) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const double p = 1.1 + 4.9 * (k % 50) / 50.0;
    const ComplexVec xi = random_cvec(rng, 3), eta = random_cvec(rng, 3);
    const ComplexVec d = xi - eta;
    const double direct = std::pow(xi.norm(), p) - std::pow(d.norm(), p) -
                          p * std::pow(d.norm(), p - 2) * d.dot(eta).real();
    EXPECT_NEAR(cp_eval(p, xi, eta), direct, 1e-12 * (std::pow(xi.norm(), p) + std::pow(d.norm(), p)));
  }
}

TEST(CpEval, NonnegativeP3) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100000; ++k) {
    const ComplexVec xi = random_cvec(rng, 2), eta = random_cvec(rng, 2, std::pow(10.0, (k % 7) - 3));
    EXPECT_GE(cp_eval(3.0, xi, eta), 0.0);
  }
}

TEST(CpEval, SmallEtaKeepsRelativeAccuracy) {
  // C_p ~ (p/2)|eta|^2 |xi|^{p-2} (1 + (p-2) cos^2) for tiny eta.
  const ComplexVec xi = cv({1.0, 0.0});
  for (double p : {1.5, 3.0}) {
    const ComplexVec eta = cv({Complex(0, 1e-9), 0.0}); // orthogonal direction
    EXPECT_NEAR(cp_eval(p, xi, eta) / (p / 2 * 1e-18), 1.0, 1e-6);
  }
}

TEST(CpProperties, Homogeneity) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 100);
  for (int k = 0; k < 2000; ++k) {
    const double p = 1.1 + 0.01 * (k % 490);
    const ComplexVec xi = random_cvec(rng, 1 + k % 3), eta = random_cvec(rng, 1 + k % 3);
    const double tau = u(rng);
    const double a = cp_eval(p, tau * xi, tau * eta);
    const double b = std::pow(tau, p) * cp_eval(p, xi, eta);
    EXPECT_NEAR(a, b, 1e-10 * std::max(std::abs(b), std::pow(tau, p) * 1e-6));
  }
}

TEST(CpProperties, UnitaryInvariance) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 2000; ++k) {
    const int l = 1 + k % 3;
    const double p = 1.1 + 0.01 * (k % 490);
    const ComplexVec xi = random_cvec(rng, l), eta = random_cvec(rng, l);
    const CMat u = random_unitary(rng, l);
    const double a = cp_eval(p, u * xi, u * eta);
    const double b = cp_eval(p, xi, eta);
    EXPECT_NEAR(a, b, 1e-10 * std::max(b, 1e-6));
  }
}

TEST(CpProperties, P2Collapse) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 5000; ++k) {
    const ComplexVec xi = random_cvec(rng, 3), eta = random_cvec(rng, 3, std::pow(10.0, k % 9 - 4));
    EXPECT_NEAR(cp_eval(2.0, xi, eta), eta.squaredNorm(), 1e-12 * eta.squaredNorm());
  }
}

TEST(CpProperties, DefiniteForEtaNonzero) {
  std::mt19937_64 rng(7);
  for (double p : {1.3, 1.8, 2.5, 4.0}) {
    for (int k = 0; k < 5000; ++k) {
      const ComplexVec xi = random_cvec(rng, 2), eta = random_cvec(rng, 2, 0.01 + k % 5);
      EXPECT_GT(cp_eval(p, xi, eta), 0.0);
    }
  }
}

TEST(RatioObjective, Examples) {
  for (auto w : {ConstantKind::c1, ConstantKind::c2, ConstantKind::c3})
    for (auto [s, t] : {std::pair{-1.0, 0.0}, std::pair{0.3, -2.0}, std::pair{10.0, 1e-3}})
      EXPECT_NEAR(ratio_objective(w, 2.0, s, t), 1.0, 1e-14);
  EXPECT_NEAR(ratio_objective(ConstantKind::c1, 4.0, -1.0, 0.0), 3.0, 1e-14);
  double prev = std::abs(ratio_objective(ConstantKind::c1, 4.0, 1e2, 0.0) - 1);
  for (double s : {1e3, 1e4}) {
    const double d = std::abs(ratio_objective(ConstantKind::c1, 4.0, s, 0.0) - 1);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-3);
  EXPECT_THROW(ratio_objective(ConstantKind::c1, 3.0, 0.0, 0.0), InvalidArgument);
}

TEST(RatioObjective, MatchesClosedForm) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 2);
  for (int k = 0; k < 1000; ++k) {
    const double p = 1.1 + 0.005 * (k % 900);
    const double s = n(rng), t = n(rng);
    const double rho2 = s * s + t * t;
    const double base = t * t + s * s + 2 * s + 1;
    const double num = std::pow(base, p / 2) - 1 - p * s;
    EXPECT_NEAR(ratio_objective(ConstantKind::c1, p, s, t), num / std::pow(rho2, p / 2),
                1e-9 * std::abs(num / std::pow(rho2, p / 2)) + 1e-12);
    const double den = std::pow(std::sqrt(base) + 1, p - 2) * rho2;
    EXPECT_NEAR(ratio_objective(ConstantKind::c2, p, s, t), num / den,
                1e-9 * std::abs(num / den) + 1e-12);
  }
}

TEST(ComputeConstant, C1AtTwoIsOne) {
  const auto e = compute_constant(ConstantKind::c1, 2.0);
  EXPECT_NEAR(e.value, 1.0, 1e-8);
  EXPECT_LE(e.bracket[0], e.value);
  EXPECT_GE(e.bracket[1], e.value);
}

TEST(ComputeConstant, C1AtFourMatchesGridOracle) {
  // Oracle: exhaustive 2000x2000 compactified grid scan; minimum 1/3 at (s, t) = (-3, 0).
  const auto e = compute_constant(ConstantKind::c1, 4.0);
  EXPECT_GT(e.value, 0.0);
  EXPECT_LE(e.value, 1.0);
  EXPECT_NEAR(e.value, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(e.argmin[0], -3.0, 1e-3);
  EXPECT_NEAR(e.argmin[1], 0.0, 1e-3);
  EXPECT_TRUE(e.attained);
  EXPECT_TRUE(std::isinf(e.limit_at_origin));
}

TEST(ComputeConstant, FrozenOracleValues) {
  // Oracle: grid scan + Nelder-Mead in double, then a 40-digit stationary point
  // search along t = 0 (the ratios are even in t).
  struct Row {
    ConstantKind w;
    double p, value, s;
  };
  for (const Row &r : {Row{ConstantKind::c1, 2.5, 0.768018663497063, -3.8145118672},
                       Row{ConstantKind::c1, 3.0, 0.585786437626905, -3.41421356237},
                       Row{ConstantKind::c1, 6.0, 0.101291755525531, -2.65062919144},
                       Row{ConstantKind::c2, 1.2, 0.189708373724115, -0.819159687848},
                       Row{ConstantKind::c2, 1.5, 0.494105884401309, -0.888888888889},
                       Row{ConstantKind::c3, 1.5, 1.30656296487638, -6.82842712475},
                       Row{ConstantKind::c3, 1.8, 1.11077159625611, -5.16028744606}}) {
    const auto e = compute_constant(r.w, r.p);
    EXPECT_NEAR(e.value, r.value, 1e-9) << to_string(r.w) << " p=" << r.p;
    EXPECT_NEAR(e.argmin[0], r.s, 1e-3 * std::abs(r.s)) << to_string(r.w) << " p=" << r.p;
    EXPECT_NEAR(e.argmin[1], 0.0, 1e-3) << to_string(r.w) << " p=" << r.p;
    EXPECT_TRUE(e.attained);
    EXPECT_LE(e.bracket[0], e.value);
    EXPECT_GE(e.bracket[1], e.value);
    // oracle values carry 15 significant digits
    EXPECT_LE(e.bracket[0], r.value + 1e-14);
    EXPECT_GE(e.bracket[1], r.value - 1e-14);
  }
}

TEST(ComputeConstant, PinchAtTwo) {
  const double p = 1.999;
  const auto c2 = compute_constant(ConstantKind::c2, p);
  const auto c3 = compute_constant(ConstantKind::c3, p);
  EXPECT_NEAR(c2.value, 1.0, 2e-3);
  EXPECT_NEAR(c3.value, 1.0, 2e-3);
  EXPECT_NEAR(p * (p - 1) / std::pow(2, p - 1), 1.0, 2e-3);
  EXPECT_NEAR(p / std::pow(2, p - 1), 1.0, 2e-3);
}

TEST(ComputeConstant, WithinLemmaIntervals) {
  for (double p : {1.2, 1.5, 1.8}) {
    const auto c2 = compute_constant(ConstantKind::c2, p);
    const auto c3 = compute_constant(ConstantKind::c3, p);
    EXPECT_GT(c2.value, 0.0);
    EXPECT_LE(c2.value, p * (p - 1) / std::pow(2, p - 1));
    EXPECT_GE(c3.value, p / std::pow(2, p - 1));
    // Origin ray limits span exactly the interval endpoints.
    EXPECT_NEAR(c2.limit_at_origin, p * (p - 1) / std::pow(2, p - 1), 1e-6);
    EXPECT_NEAR(detail::origin_limit(ConstantKind::c3, p), p / std::pow(2, p - 1), 1e-6);
  }
}

TEST(ComputeConstant, OutOfRange) {
  EXPECT_THROW(compute_constant(ConstantKind::c1, 1.5), OutOfRange);
  EXPECT_THROW(compute_constant(ConstantKind::c2, 2.5), OutOfRange);
  ConstantOptions o;
  o.allow_out_of_range = true;
  o.grid_resolution = 50;
  EXPECT_NO_THROW(compute_constant(ConstantKind::c1, 1.5, o));
}

TEST(ComputeConstant, Deterministic) {
  const auto a = compute_constant(ConstantKind::c3, 1.5);
  const auto b = compute_constant(ConstantKind::c3, 1.5);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.argmin, b.argmin);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(LemmaBoundCheck, C1AtThree) {
  const auto c1 = compute_constant(ConstantKind::c1, 3.0);
  const auto rep = lemma_bound_check(3.0, 100000, 2, {c1});
  ASSERT_EQ(rep.checks.size(), 1u);
  EXPECT_EQ(rep.checks[0].violations, 0);
  EXPECT_GE(rep.checks[0].min_ratio, c1.bracket[0]);
}

TEST(LemmaBoundCheck, C2C3AtOnePointFive) {
  const auto c2 = compute_constant(ConstantKind::c2, 1.5);
  const auto c3 = compute_constant(ConstantKind::c3, 1.5);
  const auto rep = lemma_bound_check(1.5, 100000, 2, {c2, c3});
  for (const auto &c : rep.checks)
    EXPECT_EQ(c.violations, 0) << to_string(c.which);
}

TEST(LemmaBoundCheck, P2BothBoundsTight) {
  const auto c2 = compute_constant(ConstantKind::c2, 2.0);
  const auto c3 = compute_constant(ConstantKind::c3, 2.0);
  const auto rep = lemma_bound_check(2.0, 20000, 3, {c2, c3});
  for (const auto &c : rep.checks) {
    EXPECT_EQ(c.violations, 0);
    EXPECT_NEAR(c.min_ratio, 1.0, 1e-12);
    EXPECT_NEAR(c.max_ratio, 1.0, 1e-12);
  }
}
