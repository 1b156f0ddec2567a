#pragma once

#include <algorithm>
#include <cmath>

#include "hardylab/field.hpp"

namespace hardylab {

/// Relative step used when a caller does not supply one. All built-in
/// singular sets contain the origin, so the step follows |x|.
inline constexpr double kRelativeStep = 1e-4;

inline double default_step(const Vec &x) {
  return kRelativeStep * std::max(x.norm(), 1e-2);
}

/// Central difference of order 1 or 2 along `direction`; O(h^2) error.
template <class F>
Complex fd_directional(const F &f, const Vec &x, const Vec &direction, int order,
                       double h) {
  require(h > 0, "finite-difference step must be positive");
  require(order == 1 || order == 2, "derivative order must be 1 or 2");
  const Vec xp = x + h * direction;
  const Vec xm = x - h * direction;
  if (order == 1)
    return (f(xp) - f(xm)) / (2 * h);
  return (f(xp) - 2.0 * f(x) + f(xm)) / (h * h);
}

inline Complex fd_derivative(const ScalarField &field, const Vec &x,
                             const Vec &direction, int order, double h) {
  return fd_directional(field, x, direction, order, h);
}

/// Gradient and Hessian of an arbitrary point function by central differences.
/// The Hessian uses the four-point mixed stencil off the diagonal.
template <class F>
Jet fd_jet(const F &f, const Vec &x, int order, double h) {
  const int n = static_cast<int>(x.size());
  Jet j = Jet::zero(n, order);
  const Complex f0 = f(x);
  j.value = f0;
  if (order == 0)
    return j;
  Vec xp = x, xm = x;
  CVec fp(n), fm(n);
  for (int i = 0; i < n; ++i) {
    xp[i] += h;
    xm[i] -= h;
    fp[i] = f(xp);
    fm[i] = f(xm);
    xp[i] = x[i];
    xm[i] = x[i];
    j.grad[i] = (fp[i] - fm[i]) / (2 * h);
  }
  if (order < 2)
    return j;
  for (int i = 0; i < n; ++i) {
    j.hess(i, i) = (fp[i] - 2.0 * f0 + fm[i]) / (h * h);
    for (int k = i + 1; k < n; ++k) {
      Vec y = x;
      y[i] += h;
      y[k] += h;
      const Complex fpp = f(y);
      y[k] -= 2 * h;
      const Complex fpm = f(y);
      y[i] -= 2 * h;
      const Complex fmm = f(y);
      y[k] += 2 * h;
      const Complex fmp = f(y);
      const Complex v = (fpp - fpm - fmp + fmm) / (4 * h * h);
      j.hess(i, k) = v;
      j.hess(k, i) = v;
    }
  }
  return j;
}

/// Jet of a field: closed form where the field provides it, central
/// differences otherwise. `h <= 0` selects default_step(x).
inline Jet field_jet(const ScalarField &field, const Vec &x, int order,
                     double h = 0) {
  if (field.analytic_order() >= order)
    return field.analytic_jet(x, order);
  return fd_jet(field, x, order, h > 0 ? h : default_step(x));
}

} // namespace hardylab
