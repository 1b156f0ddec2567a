#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "hardylab/fields.hpp"
#include "hardylab/finite_difference.hpp"

namespace hardylab {

/// Real l-vector field, e.g. the direction Z of the directional Hardy identity.
using DirectionField = std::function<Vec(const Vec &)>;

/// A strong-form residual: operator_term - rhs_term at one point.
struct PdeResidual {
  double operator_term = 0;
  double rhs_term = 0;
  double residual = 0; // signed
  double relative = 0; // |residual| / max(|operator_term|, |rhs_term|)
};

namespace detail {

inline PdeResidual make_residual(double op, double rhs) {
  PdeResidual r;
  r.operator_term = op;
  r.rhs_term = rhs;
  r.residual = op - rhs;
  const double scale = std::max(std::abs(op), std::abs(rhs));
  r.relative = scale > 0 ? std::abs(r.residual) / scale : 0.0;
  return r;
}

inline double signed_power(double v, double e) {
  return std::pow(std::abs(v), e) * (v < 0 ? -1.0 : 1.0);
}

inline double resolve_step(double h, const Vec &x) { return h > 0 ? h : default_step(x); }

} // namespace detail

/// Both sides of the expansion
///   L(|u|^p / (|phi|^{p-2} phi)) = [L|u|^p - (p-1)(L phi/phi)|u|^p
///       - 2(p-1) grad_L|u|^p . grad_L phi / phi + p(p-1)|grad_L phi|^2/phi^2 |u|^p]
///       / (|phi|^{p-2} phi),
/// every derivative taken by central differences with step h.
struct Prop21Terms {
  double lhs = 0;
  double rhs = 0;
  double residual = 0; // |lhs - rhs|
};

inline Prop21Terms prop21_terms(const VectorFieldSystem &sys, const ScalarField &u,
                                const ScalarField &phi, double p, const Vec &x, double h) {
  check_point(sys, x);
  require(p > 1, "p must exceed 1");
  h = detail::resolve_step(h, x);
  const double phi0 = phi(x).real();
  require(phi0 != 0.0, "prop21: phi(x) = 0");
  const int n = sys.dim_n;
  auto mod_p = [&](const Vec &y) { return Complex(std::pow(std::abs(u(y)), p), 0.0); };
  auto composite = [&](const Vec &y) {
    const double f = phi(y).real();
    return Complex(std::pow(std::abs(u(y)), p) / detail::signed_power(f, p - 1), 0.0);
  };
  auto phi_real = [&](const Vec &y) { return Complex(phi(y).real(), 0.0); };

  const SecondOrderCoefficients c = l_coefficients(sys, x);
  const Mat s = sys.sigma(x);
  const double lhs = l_apply(c, fd_jet(composite, x, 2, h)).real();

  const Jet jv = fd_jet(mod_p, x, 2, h);
  const Jet jp = fd_jet(phi_real, x, 2, h);
  const double v = jv.value.real();
  const double lv = l_apply(c, jv).real();
  const double lphi = l_apply(c, jp).real();
  const Vec gv = s * jv.grad.real().head(n);
  const Vec gp = s * jp.grad.real().head(n);
  const double bracket = lv - (p - 1) * (lphi / phi0) * v -
                         2 * (p - 1) * gv.dot(gp) / phi0 +
                         p * (p - 1) * gp.squaredNorm() / (phi0 * phi0) * v;
  Prop21Terms t;
  t.lhs = lhs;
  t.rhs = bracket / detail::signed_power(phi0, p - 1);
  t.residual = std::abs(t.lhs - t.rhs);
  return t;
}

inline double prop21_residual(const VectorFieldSystem &sys, const ScalarField &u,
                              const ScalarField &phi, double p, const Vec &x, double h) {
  return prop21_terms(sys, u, phi, p, x, h).residual;
}

/// -div_L(V |grad_L phi . Z|^{p-2} (grad_L phi . Z) Z) - lambda W |phi|^{p-2} phi,
/// or the Z-free form -div_L(V |grad_L phi|^{p-2} grad_L phi) - lambda W |phi|^{p-2} phi.
/// The flux uses the closed-form gradient of phi where available; its divergence
/// is a central difference with step h (h <= 0 selects default_step(x)).
inline PdeResidual hardy_pde_residual(const VectorFieldSystem &sys, const ScalarField &V,
                                      const ScalarField &phi, double p, double lambda,
                                      const ScalarField &W, const Vec &x,
                                      const DirectionField &Z = {}, double h = 0) {
  check_point(sys, x);
  require(p > 1, "p must exceed 1");
  h = detail::resolve_step(h, x);
  VectorField flux;
  flux.value = [&](const Vec &y) -> CVec {
    const Vec g = sys.sigma(y) * field_jet(phi, y, 1, h).grad.real();
    const double v = V(y).real();
    if (Z) {
      const Vec z = Z(y);
      const double sz = g.dot(z);
      if (sz == 0.0 && p < 2)
        throw SingularPoint("hardy_pde_residual: grad_L phi . Z = 0 with p < 2");
      return (v * detail::signed_power(sz, p - 1) * z).cast<Complex>();
    }
    const double gn = g.norm();
    if (gn == 0.0) {
      if (p < 2)
        throw SingularPoint("hardy_pde_residual: grad_L phi = 0 with p < 2");
      return CVec::Zero(sys.dim_l);
    }
    return (v * std::pow(gn, p - 2) * g).cast<Complex>();
  };
  const double op = -horizontal_divergence(sys, flux, x, {.h = h}).real();
  const double f = phi(x).real();
  const double rhs = lambda * W(x).real() * detail::signed_power(f, p - 1);
  return detail::make_residual(op, rhs);
}

/// L(V |L phi|^{p-2} L phi) - lambda W |phi|^{p-2} phi. The inner L phi uses the
/// closed-form Hessian of phi where available; the outer L is a central
/// difference stencil with step h.
inline PdeResidual rellich_pde_residual(const VectorFieldSystem &sys, const ScalarField &V,
                                        const ScalarField &phi, double p, double lambda,
                                        const ScalarField &W, const Vec &x, double h = 0) {
  check_point(sys, x);
  require(p > 1, "p must exceed 1");
  h = detail::resolve_step(h, x);
  auto inner = [&](const Vec &y) {
    const double lphi = l_apply(l_coefficients(sys, y), field_jet(phi, y, 2, h)).real();
    if (lphi == 0.0 && p < 2)
      throw SingularPoint("rellich_pde_residual: L phi = 0 with p < 2");
    return Complex(V(y).real() * detail::signed_power(lphi, p - 1), 0.0);
  };
  const double op = l_apply(l_coefficients(sys, x), fd_jet(inner, x, 2, h)).real();
  const double f = phi(x).real();
  const double rhs = lambda * W(x).real() * detail::signed_power(f, p - 1);
  return detail::make_residual(op, rhs);
}

/// -L phi / phi at x; the Rellich identity assumes this is nonnegative.
inline double rellich_sign(const VectorFieldSystem &sys, const ScalarField &phi,
                           const Vec &x, double h = 0) {
  check_point(sys, x);
  const double f = phi(x).real();
  require(f != 0.0, "rellich_sign: phi(x) = 0");
  const double lphi =
      l_apply(l_coefficients(sys, x), field_jet(phi, x, 2, detail::resolve_step(h, x))).real();
  return -lphi / f;
}

/// Observed order log2(r(h) / r(h/2)) of a residual that should scale like h^k.
struct OrderEstimate {
  double residual_h = 0;
  double residual_half = 0;
  double order = 0;
};

template <class F> OrderEstimate convergence_order(const F &residual_at, double h) {
  OrderEstimate e;
  e.residual_h = std::abs(residual_at(h));
  e.residual_half = std::abs(residual_at(h / 2));
  e.order = std::log2(e.residual_h / e.residual_half);
  return e;
}

} // namespace hardylab
