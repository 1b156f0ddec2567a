#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hardylab/calculus.hpp"
#include "hardylab/cp.hpp"
#include "hardylab/fields.hpp"
#include "hardylab/quadrature.hpp"
#include "hardylab/test_functions.hpp"

namespace hardylab {

class UnknownCase : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

enum class Theorem { hardy_directional, hardy, rellich, poincare_1d };

inline std::string to_string(Theorem t) {
  switch (t) {
  case Theorem::hardy_directional:
    return "hardy_directional";
  case Theorem::hardy:
    return "hardy";
  case Theorem::rellich:
    return "rellich";
  case Theorem::poincare_1d:
    return "poincare_1d";
  }
  return "hardy";
}

inline Theorem theorem_from_string(const std::string &s) {
  for (Theorem t : {Theorem::hardy_directional, Theorem::hardy, Theorem::rellich,
                    Theorem::poincare_1d})
    if (to_string(t) == s)
      return t;
  throw InvalidArgument("unknown theorem '" + s + "'");
}

/// Outcome of the strong-form checks on a case's (phi, V, W, lambda).
struct CaseValidation {
  int points = 0;
  double max_relative_residual = 0;
  double min_sign = std::numeric_limits<double>::infinity(); // -L phi / phi (rellich)
  double min_v = std::numeric_limits<double>::infinity();
  double tolerance = 1e-4;
  bool passed = true;
  std::string message;
};

/// One instance of an identity: the system, exponent, weights, phi, lambda,
/// optional direction Z and the test function u together with the pieces its
/// support is integrated over.
struct IdentityCase {
  std::string id;
  Theorem theorem = Theorem::hardy;
  VectorFieldSystem system;
  double p = 2;
  int N = 0;
  ScalarField u, phi, V, W;
  double lambda = 0;
  DirectionField Z;
  std::vector<IntegrationDomain> pieces;
  BumpParams bump;        // parameters of u for the bump family
  bool degenerate = false; // e.g. lambda = 0 with constant phi
  double rel_tol = 1e-5;
  double abs_tol = 1e-12;
  std::string summary;    // human-readable content of the case
  std::function<Vec(std::mt19937_64 &)> sample_point; // admissible validation points
  CaseValidation validation;
};

struct TermValue {
  std::string name;
  double value = 0;
  double err = 0;
};

struct IdentityReport {
  std::string case_id;
  Theorem theorem = Theorem::hardy;
  double p = 0;
  int N = 0;
  double lambda = 0;
  TermValue lhs{"lhs"};
  std::vector<TermValue> rhs_terms;
  std::vector<TermValue> diagnostics;
  double residual = 0;
  double rel_residual = 0;
  double quad_err_total = 0;
  double tolerance = 0; // max(abs_tol, rel_tol |lhs|) + quad_err_total
  bool identity_holds = false;
  bool converged = true;
  long evaluations = 0;
  long cells = 0;
  long negative_remainder_nodes = 0;
  CaseValidation validation;
  bool pass = false;

  const TermValue *term(const std::string &name) const {
    for (const auto &t : rhs_terms)
      if (t.name == name)
        return &t;
    for (const auto &t : diagnostics)
      if (t.name == name)
        return &t;
    return nullptr;
  }
};

/// Quadrature settings used for reference-resolution runs.
inline QuadratureSpec reference_quadrature() {
  QuadratureSpec s;
  s.points_per_axis = 10;
  s.rel_tol = 1e-9;
  s.abs_tol = 1e-14;
  s.max_refine_depth = 40;
  s.initial_splits = 2;
  return s;
}

/// |grad_L u|^2 - |grad_L |u||^2 at x, with grad_L|u| = Re(conj(u) grad_L u)/|u|.
inline double gradient_modulus_gap(const VectorFieldSystem &sys, const ScalarField &u,
                                   const Vec &x, FdOptions fd = {}) {
  check_point(sys, x);
  const Jet j = field_jet(u, x, 1, fd.h);
  require(j.value != Complex(0, 0), "gradient_modulus_gap: u(x) = 0");
  const CVec g = horizontal_gradient(sys, j, x);
  // equals |Im(conj(u) grad_L u)|^2 / |u|^2, which avoids the cancellation
  const Vec im = (j.value.real() * g.imag() - j.value.imag() * g.real()) / std::abs(j.value);
  return im.squaredNorm();
}

namespace detail {

inline double signed_pow(double v, double e) { return std::pow(std::abs(v), e) * (v < 0 ? -1 : 1); }

/// Component layout of the pointwise integrand of each theorem.
inline std::vector<std::string> integrand_names(Theorem t) {
  switch (t) {
  case Theorem::hardy:
    return {"lhs", "main_term", "cp_remainder"};
  case Theorem::hardy_directional:
    return {"lhs", "main_term", "cp_remainder", "full_gradient_lhs"};
  case Theorem::rellich:
    return {"lhs", "main_term", "cp_remainder", "rellich_gradient_term",
            "rellich_modulus_gap_term"};
  case Theorem::poincare_1d:
    return {"lhs", "main_term", "cp_remainder"};
  }
  return {};
}

} // namespace detail

/// Pointwise integrand of the case's identity at x for a test function with
/// jet `uj` (order 1, or 2 for rellich). Entries follow detail::integrand_names.
inline Values pointwise_terms(const IdentityCase &c, const Jet &uj, const Vec &x) {
  const auto names = detail::integrand_names(c.theorem);
  Values out = Values::Zero(static_cast<int>(names.size()));
  if (uj.value == Complex(0, 0))
    return out;
  const double p = c.p;
  const double au = std::abs(uj.value);
  const double aup = std::pow(au, p);

  if (c.theorem == Theorem::poincare_1d) {
    const double w = std::numbers::pi;
    const Complex du = uj.grad[0];
    // u_1 (u/u_1)' = u' - u pi cot(pi x)
    const Complex r = du - uj.value * w * std::cos(w * x[0]) / std::sin(w * x[0]);
    out << std::norm(du), c.lambda * std::norm(uj.value), std::norm(r);
    return out;
  }

  const int order = c.theorem == Theorem::rellich ? 2 : 1;
  const Jet pj = field_jet(c.phi, x, order);
  const double f = pj.value.real();
  if (f == 0.0)
    throw SingularPoint("phi vanishes on the support of u");
  const double v = c.V(x).real();
  const double w = c.W(x).real();
  const double vp = std::pow(v, 1 / p);
  const Mat s = c.system.sigma(x);
  const CVec gu = s.cast<Complex>() * uj.grad;
  const Vec gp = s * pj.grad.real();
  out[1] = c.lambda * w * aup;

  if (c.theorem == Theorem::hardy) {
    const CVec eta = gu - (uj.value / f) * gp.cast<Complex>();
    out[0] = v * std::pow(gu.norm(), p);
    out[2] = cp_eval(p, ComplexVec(vp * gu), ComplexVec(vp * eta));
    return out;
  }
  if (c.theorem == Theorem::hardy_directional) {
    const Vec z = c.Z(x);
    const Complex gz = z.cast<Complex>().dot(gu); // dot() conjugates z, which is real
    const Complex ez = gz - (uj.value / f) * gp.dot(z);
    out[0] = v * std::pow(std::abs(gz), p);
    out[2] = cp_eval(p, vp * gz, vp * ez);
    out[3] = v * std::pow(gu.norm(), p);
    return out;
  }

  // rellich
  const SecondOrderCoefficients coef = l_coefficients(c.system, x);
  const Complex lu = l_apply(coef, uj);
  const double lphi = l_apply(coef, pj).real();
  const double G = v * detail::signed_pow(lphi, p - 1) / detail::signed_pow(f, p - 1);
  const CVec wv = (gu / au) / (uj.value / au); // grad_L u / u, normalized against underflow
  const Vec re = wv.real() - gp / f;
  out[0] = v * std::pow(std::abs(lu), p);
  out[2] = cp_eval(p, vp * lu, vp * (lu - (lphi / f) * uj.value));
  out[3] = -p * (p - 1) * G * aup * re.squaredNorm();
  out[4] = -p * G * aup * wv.imag().squaredNorm();
  return out;
}

/// Strong-form validation of (phi, V, W, lambda) at `points` admissible points:
/// PDE residual <= 1e-4 relative with h = 1e-4 |x|, V >= 0, and for rellich
/// cases -L phi / phi >= 0.
inline CaseValidation validate_case(const IdentityCase &c, int points = 100,
                                    std::uint64_t seed = 20240611) {
  CaseValidation v;
  v.points = points;
  if (c.theorem == Theorem::poincare_1d) {
    // -u_1'' = pi^2 u_1 with u_1 = sin(pi x) on (0, 1)
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    const auto u1 = sine_mode(1);
    for (int k = 0; k < points; ++k) {
      Vec x(1);
      x[0] = unit(rng);
      const auto r = hardy_pde_residual(c.system, ScalarField::constant(1.0), u1, 2.0, c.lambda,
                                        ScalarField::constant(1.0), x, {}, 1e-4);
      v.max_relative_residual = std::max(v.max_relative_residual, r.relative);
    }
    v.passed = v.max_relative_residual <= v.tolerance;
    if (!v.passed)
      v.message = "eigenvalue equation residual exceeds tolerance";
    return v;
  }
  require(static_cast<bool>(c.sample_point), "case has no validation sampler");
  std::mt19937_64 rng(seed);
  for (int k = 0; k < points; ++k) {
    const Vec x = c.sample_point(rng);
    const double h = kRelativeStep * x.norm();
    PdeResidual r;
    if (c.theorem == Theorem::rellich) {
      r = rellich_pde_residual(c.system, c.V, c.phi, c.p, c.lambda, c.W, x, h);
      v.min_sign = std::min(v.min_sign, rellich_sign(c.system, c.phi, x, h));
    } else {
      const DirectionField z = c.theorem == Theorem::hardy_directional ? c.Z : DirectionField{};
      r = hardy_pde_residual(c.system, c.V, c.phi, c.p, c.lambda, c.W, x, z, h);
    }
    v.max_relative_residual = std::max(v.max_relative_residual, r.relative);
    v.min_v = std::min(v.min_v, c.V(x).real());
  }
  std::ostringstream msg;
  if (v.max_relative_residual > v.tolerance)
    msg << "PDE residual " << v.max_relative_residual << " exceeds " << v.tolerance << "; ";
  if (v.min_v < 0)
    msg << "V takes negative values; ";
  if (c.theorem == Theorem::rellich && v.min_sign < 0)
    msg << "sign hypothesis -L phi / phi >= 0 fails; ";
  v.message = msg.str();
  v.passed = v.message.empty();
  return v;
}

/// Integrates the case's identity and assembles the report. pass requires the
/// identity to hold within max(abs_tol, rel_tol |lhs|) + quad_err_total,
/// converged quadrature and a passed case validation.
inline IdentityReport verify(const IdentityCase &c, const QuadratureSpec &spec = reference_quadrature()) {
  if (c.theorem == Theorem::hardy_directional)
    require(static_cast<bool>(c.Z), "directional Hardy case needs Z");
  if (c.theorem == Theorem::poincare_1d && c.p != 2.0)
    throw OutOfRange("the interval Poincare identity is available for p = 2 only");
  require(!c.pieces.empty(), "case has no integration domain");

  const auto names = detail::integrand_names(c.theorem);
  const int ncomp = static_cast<int>(names.size());
  const int order = c.theorem == Theorem::rellich ? 2 : 1;
  long negative = 0;
  auto integrand = [&](const Vec &x) {
    if (c.u(x) == Complex(0, 0))
      return Values(Values::Zero(ncomp));
    const Values v = pointwise_terms(c, field_jet(c.u, x, order), x);
    if (v[2] < -1e-12 * (std::abs(v[0]) + std::abs(v[1])))
      ++negative;
    return v;
  };

  IdentityReport rep;
  rep.case_id = c.id;
  rep.theorem = c.theorem;
  rep.p = c.p;
  rep.N = c.N;
  rep.lambda = c.lambda;
  rep.validation = c.validation;
  Values value = Values::Zero(ncomp), err = Values::Zero(ncomp);
  for (const auto &piece : c.pieces) {
    const QuadResult r = integrate_vector(integrand, ncomp, piece, spec, spec.max_refine_depth);
    value += r.value;
    err += r.err_est;
    rep.converged = rep.converged && r.converged;
    rep.evaluations += r.evaluations;
    rep.cells += r.cells;
  }
  rep.negative_remainder_nodes = negative;
  rep.lhs = {"lhs", value[0], err[0]};
  const int n_rhs = c.theorem == Theorem::rellich ? 4 : 2;
  double rhs = 0, quad = err[0];
  for (int i = 1; i <= n_rhs; ++i) {
    rep.rhs_terms.push_back({names[i], value[i], err[i]});
    rhs += value[i];
    quad += err[i];
  }
  for (int i = n_rhs + 1; i < ncomp; ++i)
    rep.diagnostics.push_back({names[i], value[i], err[i]});
  rep.residual = std::abs(rep.lhs.value - rhs);
  rep.rel_residual = rep.lhs.value != 0 ? rep.residual / std::abs(rep.lhs.value) : rep.residual;
  rep.quad_err_total = quad;
  rep.tolerance = std::max(c.abs_tol, c.rel_tol * std::abs(rep.lhs.value)) + quad;
  rep.identity_holds = rep.residual <= rep.tolerance;
  rep.pass = rep.identity_holds && rep.converged && rep.validation.passed;
  return rep;
}

inline IdentityReport verify_hardy_directional(const IdentityCase &c,
                                               const QuadratureSpec &spec = reference_quadrature()) {
  require(c.theorem == Theorem::hardy_directional, "case is not a directional Hardy case");
  return verify(c, spec);
}

inline IdentityReport verify_hardy(const IdentityCase &c,
                                   const QuadratureSpec &spec = reference_quadrature()) {
  require(c.theorem == Theorem::hardy, "case is not a Hardy case");
  return verify(c, spec);
}

inline IdentityReport verify_rellich(const IdentityCase &c,
                                     const QuadratureSpec &spec = reference_quadrature()) {
  require(c.theorem == Theorem::rellich, "case is not a Rellich case");
  return verify(c, spec);
}

// ---------------------------------------------------------------------------
// Case construction

namespace detail {

/// Integration pieces for a radial Euclidean case whose integrands depend on x
/// through (x_1, x_2, |x|) only.
inline std::vector<IntegrationDomain> annulus_pieces(int n, const BumpParams &bp) {
  const int q = n >= 4 ? 2 : -1;
  return {IntegrationDomain::annulus(n, bp.r_in, bp.r_out, q)};
}

inline std::function<Vec(std::mt19937_64 &)> annulus_sampler(int n, const BumpParams &bp,
                                                             double min_abs_x1 = 0) {
  const double lo = bp.r_in + 0.1 * (bp.r_out - bp.r_in);
  const double hi = bp.r_out - 0.1 * (bp.r_out - bp.r_in);
  return [n, lo, hi, min_abs_x1](std::mt19937_64 &rng) {
    std::normal_distribution<double> normal(0, 1);
    std::uniform_real_distribution<double> radius(lo, hi);
    while (true) {
      Vec x(n);
      for (int i = 0; i < n; ++i)
        x[i] = normal(rng);
      x = x.normalized() * radius(rng);
      if (std::abs(x[0]) >= min_abs_x1)
        return x;
    }
  };
}

inline ScalarField radial_weight(double coef, double power) {
  std::ostringstream note;
  note << coef << " |x|^(" << power << ")";
  return real_field([coef, power](const Vec &x) { return coef * std::pow(x.norm(), power); },
                    note.str());
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

} // namespace detail

inline BumpParams default_bump(Theorem t) {
  BumpParams bp;
  bp.r_in = 0.5;
  bp.r_out = 1.5;
  bp.q = {0.2, -0.1, 0.15};
  switch (t) {
  case Theorem::hardy_directional:
    bp.k = {1.0, 0.0}; // e^{i x_1}
    break;
  case Theorem::rellich:
    bp.k = {0.0, 1.0}; // e^{i x_2}
    break;
  default:
    bp.k = {0.6, 0.8};
  }
  return bp;
}

/// Euclidean Hardy case with phi = |x|^{-(N-p)/p}, V = 1, W = |x|^{-p},
/// lambda = ((N-p)/p)^p; `directional` adds Z = x/|x|.
inline IdentityCase make_radial_hardy_case(int n, double p, bool directional,
                                           std::optional<BumpParams> bump = {}) {
  require(n >= 2 && n <= kMaxDim, "radial Hardy case: bad dimension");
  require(p > 1 && p <= n, "radial Hardy case: requires 1 < p <= N");
  IdentityCase c;
  c.theorem = directional ? Theorem::hardy_directional : Theorem::hardy;
  c.id = std::string(directional ? "cor41" : "cor42") + "-N" + std::to_string(n) + "-p" +
         detail::fmt(p);
  c.system = make_euclidean(n);
  c.p = p;
  c.N = n;
  const double a = (n - p) / p;
  c.phi = radial_power(a);
  c.V = ScalarField::constant(1.0);
  c.W = detail::radial_weight(1.0, -p);
  c.lambda = std::pow(a, p);
  c.degenerate = a == 0.0;
  if (directional)
    c.Z = [](const Vec &x) -> Vec { return x / x.norm(); };
  c.bump = bump.value_or(default_bump(c.theorem));
  c.u = make_bump(n, c.bump);
  c.pieces = detail::annulus_pieces(n, c.bump);
  c.sample_point = detail::annulus_sampler(n, c.bump);
  c.rel_tol = 1e-5;
  std::ostringstream os;
  os << (directional ? "directional L^p Hardy identity with Z = x/|x|"
                     : "L^p Hardy identity")
     << " on R^" << n << " minus the origin, p = " << detail::fmt(p)
     << "; phi = |x|^(-(N-p)/p), V = 1, W = |x|^(-p), lambda = ((N-p)/p)^p = "
     << detail::fmt(c.lambda);
  if (c.degenerate)
    os << " (degenerate: N = p, phi constant, lambda = 0)";
  c.summary = os.str();
  return c;
}

/// Euclidean Rellich case, N > 2p: phi = |x|^{-(N-2p)/p}, V = 1,
/// W = |x|^{-2p}, lambda = A^p with A = N(p-1)(N-2p)/p^2.
inline IdentityCase make_radial_rellich_case(int n, double p,
                                             std::optional<BumpParams> bump = {},
                                             std::string id = {}) {
  require(n >= 2 && n <= kMaxDim, "radial Rellich case: bad dimension");
  require(p > 1 && n > 2 * p, "radial Rellich case: requires N > 2p");
  IdentityCase c;
  c.theorem = Theorem::rellich;
  c.id = id.empty() ? "cor43-N" + std::to_string(n) + "-p" + detail::fmt(p) : id;
  c.system = make_euclidean(n);
  c.p = p;
  c.N = n;
  const double a = (n - 2 * p) / p;
  const double A = n * (p - 1) * (n - 2 * p) / (p * p);
  c.phi = radial_power(a);
  c.V = ScalarField::constant(1.0);
  c.W = detail::radial_weight(1.0, -2 * p);
  c.lambda = std::pow(A, p);
  c.bump = bump.value_or(default_bump(c.theorem));
  c.u = make_bump(n, c.bump);
  c.pieces = detail::annulus_pieces(n, c.bump);
  c.sample_point = detail::annulus_sampler(n, c.bump);
  c.rel_tol = 1e-5;
  std::ostringstream os;
  os << "L^p Rellich identity on R^" << n << " minus the origin, p = " << detail::fmt(p)
     << "; phi = |x|^(-(N-2p)/p), V = 1, W = |x|^(-2p), lambda = C_{N,p}^p with C_{N,p} = "
        "N(p-1)(N-2p)/p^2 = "
     << detail::fmt(A);
  if (p == 2.0)
    os << "; for p = 2 this is C_N = N(N-4)/4, C_" << n << " = " << detail::fmt(A)
       << ", lambda = C_N^2 = " << detail::fmt(c.lambda);
  c.summary = os.str();
  return c;
}

/// Hardy case for the Grushin system with m = k = 1: phi = rho^{-(Q-p)/p},
/// V = 1, W = |x|^{gamma p} rho^{-(gamma+1)p}, lambda = ((Q-p)/p)^p,
/// Q = m + (1 + gamma) k. Integrated over two boxes split along x = 0.
inline IdentityCase make_grushin_hardy_case(double p, double gamma = 1.0,
                                            std::optional<BumpParams> bump = {}) {
  require(gamma > 0, "Grushin Hardy case needs gamma > 0");
  const double Q = 1 + (1 + gamma);
  require(p > 1 && p < Q, "Grushin Hardy case: requires 1 < p < Q");
  IdentityCase c;
  c.theorem = Theorem::hardy;
  c.id = "grushin-hardy-p" + detail::fmt(p);
  if (gamma != 1.0)
    c.id += "-g" + detail::fmt(gamma);
  c.system = make_grushin(1, 1, gamma);
  c.p = p;
  c.N = 2;
  const double beta = (Q - p) / p;
  c.phi = grushin_gauge_power(1, 1, gamma, beta);
  const auto rho = grushin_gauge_power(1, 1, gamma, -1.0);
  c.V = ScalarField::constant(1.0);
  c.W = real_field(
      [rho, gamma, p](const Vec &z) {
        return std::pow(std::abs(z[0]), gamma * p) * std::pow(rho(z).real(), -(gamma + 1) * p);
      },
      "|x|^(gamma p) rho^(-(gamma+1) p)");
  c.lambda = std::pow(beta, p);
  c.bump = bump.value_or(default_bump(Theorem::hardy));
  c.u = make_bump(2, c.bump);
  const double R = c.bump.r_out;
  Vec lo(2), mid(2), hi(2);
  lo << -R, -R;
  mid << 0, R;
  hi << R, R;
  Vec mid_lo(2);
  mid_lo << 0, -R;
  c.pieces = {IntegrationDomain::box(lo, mid), IntegrationDomain::box(mid_lo, hi)};
  c.sample_point = detail::annulus_sampler(2, c.bump, 0.1);
  c.rel_tol = 1e-5;
  std::ostringstream os;
  os << "L^p Hardy identity for the Baouendi-Grushin system (m = k = 1, gamma = "
     << detail::fmt(gamma) << "), p = " << detail::fmt(p)
     << "; phi = rho^(-(Q-p)/p) with rho = (|x|^(2+2 gamma) + (1+gamma)^2 |y|^2)^(1/(2+2 gamma)), "
        "Q = "
     << detail::fmt(Q) << ", V = 1, W = |x|^(gamma p) rho^(-(gamma+1) p), lambda = ((Q-p)/p)^p = "
     << detail::fmt(c.lambda);
  c.summary = os.str();
  return c;
}

/// The interval identity int |u'|^2 = pi^2 int |u|^2 + int |u_1 (u/u_1)'|^2
/// on (0, 1), u_1 = sin(pi x).
inline IdentityCase make_poincare_case(ScalarField u, std::string id = "poincare-1d") {
  IdentityCase c;
  c.id = std::move(id);
  c.theorem = Theorem::poincare_1d;
  c.system = make_euclidean(1);
  c.p = 2;
  c.N = 1;
  c.u = std::move(u);
  c.phi = sine_mode(1);
  c.V = ScalarField::constant(1.0);
  c.W = ScalarField::constant(1.0);
  c.lambda = std::numbers::pi * std::numbers::pi;
  c.pieces = {IntegrationDomain::box(Vec::Zero(1), Vec::Ones(1))};
  c.rel_tol = 1e-10;
  c.abs_tol = 1e-10;
  c.summary = "Poincare identity on (0, 1) with p = 2: first Dirichlet eigenfunction "
              "u_1 = sin(pi x), lambda_1 = pi^2; test function " +
              c.u.note();
  return c;
}

inline IdentityReport verify_poincare_interval(const ScalarField &u,
                                               const QuadratureSpec &spec = reference_quadrature(),
                                               double p = 2.0) {
  if (p != 2.0)
    throw OutOfRange("the interval Poincare identity is available for p = 2 only");
  IdentityCase c = make_poincare_case(u);
  c.validation = validate_case(c, 20);
  return verify(c, spec);
}

/// Swaps the bump test function of a bump-family case.
inline IdentityCase with_test_function(IdentityCase c, const BumpParams &bp) {
  require(c.theorem != Theorem::poincare_1d, "the interval case does not use the bump family");
  c.bump = bp;
  c.u = make_bump(c.N, bp);
  if (c.system.kind == SystemKind::grushin) {
    const double R = bp.r_out;
    Vec lo(2), mid(2), mid_lo(2), hi(2);
    lo << -R, -R;
    mid << 0, R;
    mid_lo << 0, -R;
    hi << R, R;
    c.pieces = {IntegrationDomain::box(lo, mid), IntegrationDomain::box(mid_lo, hi)};
    c.sample_point = detail::annulus_sampler(2, bp, 0.1);
  } else {
    c.pieces = detail::annulus_pieces(c.N, bp);
    c.sample_point = detail::annulus_sampler(c.N, bp);
  }
  return c;
}

/// C_p integrand at x when u equals c * phi near x; zero for the extremizers.
inline double extremizer_remainder(const IdentityCase &c, Complex scale, const Vec &x) {
  const int order = c.theorem == Theorem::rellich ? 2 : 1;
  const Jet pj = field_jet(c.phi, x, order);
  return pointwise_terms(c, scale * pj, x)[2];
}

// ---------------------------------------------------------------------------
// Registry

inline std::vector<std::string> list_case_ids() {
  std::vector<std::string> ids;
  for (const char *fam : {"cor41", "cor42"})
    for (int n : {3, 4})
      for (const char *p : {"1.5", "2", "3"})
        ids.push_back(std::string(fam) + "-N" + std::to_string(n) + "-p" + p);
  for (const char *id : {"cor43-N4-p1.5", "cor43-N5-p1.5", "cor43-N5-p2", "cor43-N6-p2",
                         "cor43-N7-p2.5", "cor44-N5", "cor44-N6", "grushin-hardy-p1.5",
                         "grushin-hardy-p2", "grushin-hardy-p2.5", "poincare-1d"})
    ids.emplace_back(id);
  return ids;
}

/// Builds a registered case and runs its strong-form validation.
inline IdentityCase case_library(const std::string &id) {
  const auto ids = list_case_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end())
    throw UnknownCase("unknown case id '" + id + "'");
  IdentityCase c;
  auto num_after = [&](const std::string &key) {
    const auto pos = id.find(key);
    return std::stod(id.substr(pos + key.size()));
  };
  if (id.rfind("cor41", 0) == 0 || id.rfind("cor42", 0) == 0) {
    c = make_radial_hardy_case(static_cast<int>(num_after("-N")), num_after("-p"),
                               id.rfind("cor41", 0) == 0);
  } else if (id.rfind("cor43", 0) == 0) {
    c = make_radial_rellich_case(static_cast<int>(num_after("-N")), num_after("-p"));
  } else if (id.rfind("cor44", 0) == 0) {
    c = make_radial_rellich_case(static_cast<int>(num_after("-N")), 2.0, {}, id);
  } else if (id.rfind("grushin-hardy", 0) == 0) {
    c = make_grushin_hardy_case(num_after("-p"));
  } else {
    c = make_poincare_case(sine_mode(2));
  }
  c.id = id;
  c.validation = validate_case(c);
  return c;
}

} // namespace hardylab
