#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "hardylab/field.hpp"
#include "hardylab/finite_difference.hpp"

namespace hardylab {

enum class SystemKind { euclidean, grushin, greiner, custom };

inline std::string to_string(SystemKind k) {
  switch (k) {
  case SystemKind::euclidean:
    return "euclidean";
  case SystemKind::grushin:
    return "grushin";
  case SystemKind::greiner:
    return "greiner";
  case SystemKind::custom:
    return "custom";
  }
  return "custom";
}

/// Dimensions and parameters for the built-in systems.
///   euclidean: n = N
///   grushin:   m, k (N = m + k), gamma >= 0
///   greiner:   n (N = 2n + 1), gamma >= 1
struct SystemParams {
  int n = 0;
  int m = 0;
  int k = 0;
  double gamma = 0.0;
};

/// An l x N matrix field sigma defining X_i = sum_j sigma_ij d/dx_j.
///
/// `sigma_div(x)_i = sum_j d_j sigma_ij` and `sigma_partial(x, j) = d_j sigma`
/// are hand-coded for the built-in kinds so that L never differentiates sigma
/// numerically.
struct VectorFieldSystem {
  SystemKind kind = SystemKind::custom;
  int dim_n = 0;
  int dim_l = 0;
  SystemParams params;
  std::function<Mat(const Vec &)> sigma;
  std::function<Vec(const Vec &)> sigma_div;
  std::function<Mat(const Vec &, int)> sigma_partial;
};

namespace detail {

inline VectorFieldSystem euclidean(int n) {
  VectorFieldSystem s;
  s.kind = SystemKind::euclidean;
  s.dim_n = s.dim_l = n;
  s.params.n = n;
  s.sigma = [n](const Vec &) -> Mat { return Mat::Identity(n, n); };
  s.sigma_div = [n](const Vec &) -> Vec { return Vec::Zero(n); };
  s.sigma_partial = [n](const Vec &, int) -> Mat { return Mat::Zero(n, n); };
  return s;
}

inline VectorFieldSystem grushin(int m, int k, double gamma) {
  VectorFieldSystem s;
  s.kind = SystemKind::grushin;
  s.dim_n = s.dim_l = m + k;
  s.params.m = m;
  s.params.k = k;
  s.params.gamma = gamma;
  const int n = m + k;
  s.sigma = [=](const Vec &z) -> Mat {
    Mat a = Mat::Identity(n, n);
    const double w = std::pow(z.head(m).norm(), gamma);
    for (int i = m; i < n; ++i)
      a(i, i) = w;
    return a;
  };
  // Row m+a is |x|^gamma e_{m+a}; it depends on x only, so its divergence
  // d/dy_a(|x|^gamma) vanishes.
  s.sigma_div = [n](const Vec &) -> Vec { return Vec::Zero(n); };
  s.sigma_partial = [=](const Vec &z, int j) -> Mat {
    Mat d = Mat::Zero(n, n);
    if (j >= m || gamma == 0.0)
      return d;
    const double r = z.head(m).norm();
    const double dw = gamma * std::pow(r, gamma - 2.0) * z[j];
    for (int i = m; i < n; ++i)
      d(i, i) = dw;
    return d;
  };
  return s;
}

inline VectorFieldSystem greiner(int nh, double gamma) {
  VectorFieldSystem s;
  s.kind = SystemKind::greiner;
  const int n = 2 * nh + 1;
  s.dim_n = n;
  s.dim_l = 2 * nh;
  s.params.n = nh;
  s.params.gamma = gamma;
  // z = (x, y, t); rows X_i = d_xi + 2g y_i |z|^{2g-2} d_t,
  //                     Y_i = d_yi - 2g x_i |z|^{2g-2} d_t, |z| = |(x, y)|.
  s.sigma = [=](const Vec &z) -> Mat {
    Mat a = Mat::Zero(2 * nh, n);
    const double w = 2 * gamma * std::pow(z.head(2 * nh).squaredNorm(), gamma - 1.0);
    for (int i = 0; i < nh; ++i) {
      a(i, i) = 1.0;
      a(i, n - 1) = w * z[nh + i];
      a(nh + i, nh + i) = 1.0;
      a(nh + i, n - 1) = -w * z[i];
    }
    return a;
  };
  // The t-coefficients do not depend on t.
  s.sigma_div = [nh](const Vec &) -> Vec { return Vec::Zero(2 * nh); };
  s.sigma_partial = [=](const Vec &z, int j) -> Mat {
    Mat d = Mat::Zero(2 * nh, n);
    if (j == n - 1)
      return d;
    const double q = z.head(2 * nh).squaredNorm();
    const double w = 2 * gamma * std::pow(q, gamma - 1.0);
    // d_j w = 2g (g-1) q^{g-2} 2 z_j
    const double dw =
        gamma == 1.0 ? 0.0 : 4 * gamma * (gamma - 1.0) * std::pow(q, gamma - 2.0) * z[j];
    for (int i = 0; i < nh; ++i) {
      d(i, n - 1) = dw * z[nh + i] + (j == nh + i ? w : 0.0);
      d(nh + i, n - 1) = -(dw * z[i] + (j == i ? w : 0.0));
    }
    return d;
  };
  return s;
}

} // namespace detail

/// Builds one of the built-in systems. Throws InvalidArgument for
/// unsupported constructions (non-positive dimensions, grushin with gamma < 0,
/// greiner with gamma < 1, custom without sigma).
inline VectorFieldSystem make_system(SystemKind kind, const SystemParams &p) {
  switch (kind) {
  case SystemKind::euclidean:
    require(p.n >= 1, "euclidean system needs N >= 1");
    require(p.n <= kMaxDim, "dimension exceeds kMaxDim");
    return detail::euclidean(p.n);
  case SystemKind::grushin:
    require(p.m >= 1 && p.k >= 1, "grushin system needs m >= 1 and k >= 1");
    require(p.m + p.k <= kMaxDim, "dimension exceeds kMaxDim");
    require(p.gamma >= 0, "grushin system needs gamma >= 0");
    return detail::grushin(p.m, p.k, p.gamma);
  case SystemKind::greiner:
    require(p.n >= 1, "greiner system needs n >= 1");
    require(2 * p.n + 1 <= kMaxDim, "dimension exceeds kMaxDim");
    require(p.gamma >= 1, "greiner system needs gamma >= 1");
    return detail::greiner(p.n, p.gamma);
  case SystemKind::custom:
    break;
  }
  throw InvalidArgument("custom systems are built with make_custom_system");
}

inline VectorFieldSystem make_euclidean(int n) {
  return make_system(SystemKind::euclidean, {.n = n});
}
inline VectorFieldSystem make_grushin(int m, int k, double gamma) {
  return make_system(SystemKind::grushin, {.m = m, .k = k, .gamma = gamma});
}
inline VectorFieldSystem make_greiner(int n, double gamma) {
  return make_system(SystemKind::greiner, {.n = n, .gamma = gamma});
}

/// Registers a custom sigma. Missing derivative callbacks are replaced by
/// central differences of sigma with step `h`.
inline VectorFieldSystem
make_custom_system(int dim_n, int dim_l, std::function<Mat(const Vec &)> sigma,
                   std::function<Vec(const Vec &)> sigma_div = {},
                   std::function<Mat(const Vec &, int)> sigma_partial = {},
                   double h = 1e-5) {
  require(dim_n >= 1 && dim_l >= 1, "custom system needs positive dimensions");
  require(dim_n <= kMaxDim && dim_l <= kMaxDim, "dimension exceeds kMaxDim");
  require(static_cast<bool>(sigma), "custom system needs sigma");
  VectorFieldSystem s;
  s.kind = SystemKind::custom;
  s.dim_n = dim_n;
  s.dim_l = dim_l;
  s.sigma = sigma;
  if (!sigma_partial) {
    sigma_partial = [sigma, h](const Vec &x, int j) -> Mat {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      return (sigma(xp) - sigma(xm)) / (2 * h);
    };
  }
  if (!sigma_div) {
    sigma_div = [sigma_partial, dim_n, dim_l](const Vec &x) -> Vec {
      Vec d = Vec::Zero(dim_l);
      for (int j = 0; j < dim_n; ++j)
        d += sigma_partial(x, j).col(j);
      return d;
    };
  }
  s.sigma_div = std::move(sigma_div);
  s.sigma_partial = std::move(sigma_partial);
  return s;
}

/// A complex l-vector valued map with optional Euclidean Jacobian
/// (l x N, entry (i, j) = d_j F_i).
struct VectorField {
  std::function<CVec(const Vec &)> value;
  std::function<CMat(const Vec &)> jacobian;
};

struct FdOptions {
  double h = 0.0; // <= 0 selects default_step(x)
  bool allow_fd = true;
};

inline void check_point(const VectorFieldSystem &sys, const Vec &x) {
  require(x.size() == sys.dim_n, "point dimension does not match the system");
}

/// nabla_L u = sigma(x) grad u(x).
inline CVec horizontal_gradient(const VectorFieldSystem &sys, const ScalarField &u,
                                const Vec &x, FdOptions fd = {}) {
  check_point(sys, x);
  require(fd.allow_fd || u.analytic_order() >= 1,
          "field has no analytic gradient and finite differences are disabled");
  const Jet j = field_jet(u, x, 1, fd.h);
  return sys.sigma(x).cast<Complex>() * j.grad;
}

/// Horizontal gradient from an already evaluated jet.
inline CVec horizontal_gradient(const VectorFieldSystem &sys, const Jet &j,
                                const Vec &x) {
  return sys.sigma(x).cast<Complex>() * j.grad;
}

/// div_L F = div(sigma^T F) = sum_ij sigma_ij d_j F_i + sum_i (sum_j d_j sigma_ij) F_i.
inline Complex horizontal_divergence(const VectorFieldSystem &sys, const VectorField &F,
                                     const Vec &x, FdOptions fd = {}) {
  check_point(sys, x);
  const int n = sys.dim_n;
  CMat jac(sys.dim_l, n);
  if (F.jacobian) {
    jac = F.jacobian(x);
  } else {
    require(fd.allow_fd, "vector field has no Jacobian and finite differences are disabled");
    const double h = fd.h > 0 ? fd.h : default_step(x);
    Vec xp = x, xm = x;
    for (int j = 0; j < n; ++j) {
      xp[j] += h;
      xm[j] -= h;
      jac.col(j) = (F.value(xp) - F.value(xm)) / (2 * h);
      xp[j] = x[j];
      xm[j] = x[j];
    }
  }
  const Mat s = sys.sigma(x);
  Complex acc = (s.cast<Complex>().array() * jac.array()).sum();
  acc += sys.sigma_div(x).cast<Complex>().dot(F.value(x));
  return acc;
}

/// Coefficients of L in non-divergence form: L u = tr(M H) + b . grad u with
/// M = sigma^T sigma and b_k = sum_i [X_i(sigma_ik) + (div sigma)_i sigma_ik].
struct SecondOrderCoefficients {
  Mat M;
  Vec b;
};

inline SecondOrderCoefficients l_coefficients(const VectorFieldSystem &sys,
                                              const Vec &x) {
  const Mat s = sys.sigma(x);
  SecondOrderCoefficients c;
  c.M = s.transpose() * s;
  c.b = s.transpose() * sys.sigma_div(x);
  if (sys.kind == SystemKind::euclidean)
    return c;
  for (int j = 0; j < sys.dim_n; ++j) {
    const Mat dj = sys.sigma_partial(x, j);
    // sum_i sigma_ij (d_j sigma)_ik
    c.b += dj.transpose() * s.col(j);
  }
  return c;
}

inline Complex l_apply(const SecondOrderCoefficients &c, const Jet &j) {
  return (c.M.cast<Complex>().array() * j.hess.array()).sum() +
         c.b.cast<Complex>().dot(j.grad);
}

/// L u(x) = div_L(nabla_L u)(x); the Laplacian for the Euclidean system.
inline Complex l_apply(const VectorFieldSystem &sys, const ScalarField &u, const Vec &x,
                       FdOptions fd = {}) {
  check_point(sys, x);
  require(fd.allow_fd || u.analytic_order() >= 2,
          "field has no analytic Hessian and finite differences are disabled");
  return l_apply(l_coefficients(sys, x), field_jet(u, x, 2, fd.h));
}

/// Returns -div_L(|nabla_L u|^{p-2} nabla_L u)(x) for a real field u.
/// Throws SingularPoint when nabla_L u(x) = 0 and p < 2.
inline double lp_apply(const VectorFieldSystem &sys, const ScalarField &u, double p,
                       const Vec &x, FdOptions fd = {}) {
  check_point(sys, x);
  require(p > 1, "p must exceed 1");
  const Mat s = sys.sigma(x);
  const int n = sys.dim_n;

  if (u.analytic_order() < 2) {
    require(fd.allow_fd, "field has no analytic Hessian and finite differences are disabled");
    const double h = fd.h > 0 ? fd.h : default_step(x);
    // Flux from first derivatives, divergence by central differences.
    VectorField flux;
    flux.value = [&](const Vec &y) -> CVec {
      const Vec g = (sys.sigma(y) * field_jet(u, y, 1, h).grad.real()).eval();
      const double gn = g.norm();
      if (gn == 0.0) {
        if (p < 2)
          throw SingularPoint("lp_apply: |nabla_L u| = 0 with p < 2");
        return CVec::Zero(sys.dim_l);
      }
      return (std::pow(gn, p - 2) * g).cast<Complex>();
    };
    return -horizontal_divergence(sys, flux, x, {.h = h}).real();
  }

  const Jet j = u.analytic_jet(x, 2);
  const Vec grad = j.grad.real();
  const Mat hess = j.hess.real();
  const Vec g = s * grad;
  const double gn = g.norm();
  if (gn == 0.0) {
    if (p < 2)
      throw SingularPoint("lp_apply: |nabla_L u| = 0 with p < 2");
    if (p > 2)
      return 0.0;
  }
  // dg(i, j) = d_j g_i = sum_k (d_j sigma)_ik d_k u + sigma_ik H_kj
  Mat dg = s * hess;
  if (sys.kind != SystemKind::euclidean)
    for (int jj = 0; jj < n; ++jj)
      dg.col(jj) += sys.sigma_partial(x, jj) * grad;
  const double w = p == 2.0 ? 1.0 : std::pow(gn, p - 2);
  Mat dflux = w * dg;
  if (p != 2.0)
    dflux += (p - 2) * std::pow(gn, p - 4) * g * (g.transpose() * dg);
  const Vec flux = w * g;
  const double div = (s.array() * dflux.array()).sum() + sys.sigma_div(x).dot(flux);
  return -div;
}

} // namespace hardylab
