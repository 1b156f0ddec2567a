#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "hardylab/types.hpp"

namespace hardylab {

/// Value, Euclidean gradient and Hessian of a complex scalar at one point.
/// `order` records how many derivative levels are populated (0, 1 or 2).
struct Jet {
  Complex value{0.0, 0.0};
  CVec grad;
  CMat hess;
  int order = 0;

  static Jet zero(int dim, int order) {
    Jet j;
    j.order = order;
    if (order >= 1)
      j.grad = CVec::Zero(dim);
    if (order >= 2)
      j.hess = CMat::Zero(dim, dim);
    return j;
  }
  static Jet constant(Complex c, int dim, int order) {
    Jet j = zero(dim, order);
    j.value = c;
    return j;
  }
};

inline Jet operator*(const Jet &a, const Jet &b) {
  Jet r;
  r.order = std::min(a.order, b.order);
  r.value = a.value * b.value;
  if (r.order >= 1)
    r.grad = a.value * b.grad + b.value * a.grad;
  if (r.order >= 2)
    r.hess = a.value * b.hess + b.value * a.hess + a.grad * b.grad.transpose() +
             b.grad * a.grad.transpose();
  return r;
}

inline Jet operator*(Complex c, Jet a) {
  a.value *= c;
  if (a.order >= 1)
    a.grad *= c;
  if (a.order >= 2)
    a.hess *= c;
  return a;
}

inline Jet operator+(Jet a, const Jet &b) {
  a.order = std::min(a.order, b.order);
  a.value += b.value;
  if (a.order >= 1)
    a.grad += b.grad;
  if (a.order >= 2)
    a.hess += b.hess;
  return a;
}

/// Chain rule for a scalar function g applied to a jet: derivs = (g, g', g'')
/// evaluated at a.value.
inline Jet compose(const Jet &a, Complex g0, Complex g1, Complex g2) {
  Jet r;
  r.order = a.order;
  r.value = g0;
  if (r.order >= 1)
    r.grad = g1 * a.grad;
  if (r.order >= 2)
    r.hess = g1 * a.hess + g2 * (a.grad * a.grad.transpose());
  return r;
}

/// Jet of x -> f(|x - center|) from the radial profile (f, f', f'').
inline Jet radial_jet(const Vec &x, double f0, double f1, double f2, int order) {
  const int n = static_cast<int>(x.size());
  Jet j = Jet::zero(n, order);
  j.value = f0;
  if (order == 0)
    return j;
  const double r = x.norm();
  const Vec e = x / r;
  j.grad = (f1 * e).cast<Complex>();
  if (order >= 2) {
    const Mat ee = e * e.transpose();
    const Mat h = f2 * ee + (f1 / r) * (Mat::Identity(n, n) - ee);
    j.hess = h.cast<Complex>();
  }
  return j;
}

/// Region outside of which a field vanishes identically.
struct Support {
  enum class Kind { everywhere, box, annulus };
  Kind kind = Kind::everywhere;
  Vec lo, hi;       // box
  double r_in = 0;  // annulus, centred at the origin
  double r_out = 0;

  static Support everywhere() { return {}; }
  static Support box(Vec lo, Vec hi) {
    Support s;
    s.kind = Kind::box;
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    return s;
  }
  static Support annulus(double r_in, double r_out) {
    require(0 <= r_in && r_in < r_out, "annulus requires 0 <= r_in < r_out");
    Support s;
    s.kind = Kind::annulus;
    s.r_in = r_in;
    s.r_out = r_out;
    return s;
  }

  bool contains(const Vec &x) const {
    switch (kind) {
    case Kind::everywhere:
      return true;
    case Kind::box:
      return ((x.array() >= lo.array()) && (x.array() <= hi.array())).all();
    case Kind::annulus: {
      const double r = x.norm();
      return r >= r_in && r <= r_out;
    }
    }
    return true;
  }
};

/// A complex-valued scalar field. Derivatives are optional: `analytic_order`
/// tells how many levels `jet` can deliver in closed form; callers fall back
/// to finite differences for the rest.
class ScalarField {
public:
  using ValueFn = std::function<Complex(const Vec &)>;
  using JetFn = std::function<Jet(const Vec &, int)>;

  ScalarField() = default;

  static ScalarField from_value(ValueFn f, Support support = {},
                                std::string note = {}) {
    ScalarField s;
    s.value_ = std::move(f);
    s.support_ = std::move(support);
    s.note_ = std::move(note);
    return s;
  }

  static ScalarField from_jet(JetFn f, int analytic_order, Support support = {},
                              std::string note = {}) {
    require(analytic_order >= 0 && analytic_order <= 2,
            "analytic_order must be 0, 1 or 2");
    ScalarField s;
    s.value_ = [f](const Vec &x) { return f(x, 0).value; };
    s.jet_ = std::move(f);
    s.analytic_order_ = analytic_order;
    s.support_ = std::move(support);
    s.note_ = std::move(note);
    return s;
  }

  static ScalarField constant(Complex c) {
    return from_jet(
        [c](const Vec &x, int order) {
          return Jet::constant(c, static_cast<int>(x.size()), order);
        },
        2, {}, "constant");
  }

  explicit operator bool() const { return static_cast<bool>(value_); }

  Complex operator()(const Vec &x) const {
    if (!support_.contains(x))
      return 0.0;
    return value_(x);
  }

  int analytic_order() const { return jet_ ? analytic_order_ : 0; }

  /// Closed-form jet; `order` must not exceed analytic_order().
  Jet analytic_jet(const Vec &x, int order) const {
    require(order <= analytic_order(), "requested jet order exceeds analytic order");
    if (!support_.contains(x))
      return Jet::zero(static_cast<int>(x.size()), order);
    if (!jet_)
      return Jet::constant(value_(x), static_cast<int>(x.size()), 0);
    return jet_(x, order);
  }

  const Support &support() const { return support_; }
  const std::string &note() const { return note_; }

private:
  ValueFn value_;
  JetFn jet_;
  int analytic_order_ = 0;
  Support support_;
  std::string note_;
};

} // namespace hardylab
