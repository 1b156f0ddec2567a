#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hardylab/nelder_mead.hpp"
#include "hardylab/types.hpp"

namespace hardylab {

/// Complex l-vector; stored as l complex numbers (2l reals).
using ComplexVec = CVec;

namespace detail {

/// (1 + t)^q - 1 - q t for t >= -1, without cancellation near t = 0.
inline double binomial_tail(double q, double t) {
  if (std::abs(t) < 0.5) {
    double coef = q * (q - 1) / 2;
    double pw = t * t;
    double sum = 0.0;
    for (int k = 2; k < 200; ++k) {
      const double term = coef * pw;
      sum += term;
      if (term == 0.0 || std::abs(term) <= 1e-18 * std::abs(sum))
        break;
      coef *= (q - k) / (k + 1);
      pw *= t;
    }
    return sum;
  }
  return std::pow(1 + t, q) - 1 - q * t;
}

} // namespace detail

/// C_p(xi, eta) = |xi|^p - |xi - eta|^p - p |xi - eta|^{p-2} Re((xi - eta) . conj(eta)).
///
/// With d = xi - eta, a = |d|^2, c = 2 Re(d . conj(eta)) / a and e = |eta|^2 / a
/// the value equals a^{p/2} [ (p/2) e + (1 + c + e)^{p/2} - 1 - (p/2)(c + e) ],
/// which is evaluated directly when eta is small relative to d. For d = 0 the
/// third term is taken as 0 (its limit).
inline double cp_eval(double p, const ComplexVec &xi, const ComplexVec &eta) {
  require(xi.size() == eta.size(), "cp_eval: dimension mismatch");
  require(p > 1, "cp_eval: p must exceed 1");
  // p-homogeneous: evaluate at unit scale so that tiny arguments do not underflow
  const double scale = std::max(xi.cwiseAbs().maxCoeff(), eta.cwiseAbs().maxCoeff());
  if (scale == 0.0)
    return 0.0;
  if (scale < 1e-100 || scale > 1e100)
    return std::pow(scale, p) * cp_eval(p, ComplexVec(xi / scale), ComplexVec(eta / scale));
  const ComplexVec d = xi - eta;
  const double a = d.squaredNorm();
  if (a == 0.0)
    return std::pow(xi.norm(), p);
  const double re = d.dot(eta).real(); // dot() conjugates its first argument
  const double q = p / 2;
  const double t = (2 * re + eta.squaredNorm()) / a;
  if (std::abs(t) < 0.5) {
    const double e = eta.squaredNorm() / a;
    return std::pow(a, q) * (q * e + detail::binomial_tail(q, t));
  }
  return std::pow(xi.norm(), p) - std::pow(a, q) - p * std::pow(a, q - 1) * re;
}

inline double cp_eval(double p, Complex xi, Complex eta) {
  ComplexVec x(1), e(1);
  x[0] = xi;
  e[0] = eta;
  return cp_eval(p, x, e);
}

enum class ConstantKind { c1, c2, c3 };

inline std::string to_string(ConstantKind k) {
  switch (k) {
  case ConstantKind::c1:
    return "c1";
  case ConstantKind::c2:
    return "c2";
  case ConstantKind::c3:
    return "c3";
  }
  return "c1";
}

/// Admissible exponent range of the lemma that defines each constant;
/// p = 2 is admitted for c2/c3 as the limit case.
inline bool in_lemma_range(ConstantKind which, double p) {
  if (which == ConstantKind::c1)
    return p >= 2;
  return p > 1 && p <= 2;
}

/// The two-parameter ratio whose infimum (c1, c2) or supremum (c3) defines the
/// constant. Computable for any p > 1; (s, t) = (0, 0) is rejected.
inline double ratio_objective(ConstantKind which, double p, double s, double t) {
  require(p > 1, "ratio_objective: p must exceed 1");
  const double rho2 = s * s + t * t;
  require(rho2 > 0, "ratio_objective: (s, t) = (0, 0) is excluded");
  const double q = p / 2;
  const double tau = 2 * s + rho2;
  // (1 + tau)^q - 1 - p s = q rho^2 + tail(tau)
  const double numerator = q * rho2 + detail::binomial_tail(q, tau);
  if (which == ConstantKind::c1)
    return numerator / std::pow(rho2, q);
  const double xi_norm = std::hypot(1 + s, t);
  return numerator / (std::pow(xi_norm + 1, p - 2) * rho2);
}

struct ConstantOptions {
  int grid_resolution = 400;
  double refine_tol = 1e-7;   // simplex diameter in compactified coordinates
  double origin_exclusion = 1e-6;
  int max_evaluations = 20000;
  bool allow_out_of_range = false;
};

struct ConstantEstimate {
  ConstantKind which = ConstantKind::c1;
  double p = 0;
  double value = 0;
  std::array<double, 2> bracket{}; // lo, hi
  std::array<double, 2> argmin{};  // (s, t) of the best finite point
  bool attained = true;            // false when a boundary limit is extremal
  int evaluations = 0;
  double limit_at_infinity = 1.0;
  double limit_at_origin = 0.0;
  bool converged = true;
};

namespace detail {

/// Extremal ray limit of the ratio at (s, t) -> 0. The c1 ratio behaves like
/// rho^{2-p} there, so its limit is +inf for p > 2 and 1 for p = 2. For c2/c3
/// each ray limit is extrapolated from two small radii.
inline double origin_limit(ConstantKind which, double p, int rays = 1440) {
  if (which == ConstantKind::c1)
    return p > 2 ? std::numeric_limits<double>::infinity() : 1.0;
  const double r = 1e-5;
  double best = which == ConstantKind::c2 ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
  for (int i = 0; i < rays; ++i) {
    const double th = 2 * std::numbers::pi * i / rays;
    const double c = std::cos(th), s = std::sin(th);
    const double f1 = ratio_objective(which, p, r * c, r * s);
    const double f2 = ratio_objective(which, p, 2 * r * c, 2 * r * s);
    const double lim = 2 * f1 - f2;
    best = which == ConstantKind::c2 ? std::min(best, lim) : std::max(best, lim);
  }
  return best;
}

} // namespace detail

/// Optimizes the ratio over the compactified plane s = tan a, t = tan b:
/// a deterministic grid scan over cell centres followed by Nelder-Mead from the
/// best cell. The boundary limits (|(s, t)| -> inf, -> 0) compete with the
/// finite optimum. The bracket is heuristic: grid granularity plus refinement
/// slack, widened when the refinement did not converge.
inline ConstantEstimate compute_constant(ConstantKind which, double p,
                                         const ConstantOptions &opts = {}) {
  require(opts.grid_resolution >= 2, "grid_resolution must be at least 2");
  if (!opts.allow_out_of_range && !in_lemma_range(which, p))
    throw OutOfRange("p = " + std::to_string(p) + " is outside the admissible range for " +
                     to_string(which));
  const double half_pi = std::numbers::pi / 2;
  const double sign = which == ConstantKind::c3 ? -1.0 : 1.0; // minimize sign * f
  int evals = 0;
  auto objective = [&](double a, double b) {
    const double s = std::tan(a), t = std::tan(b);
    ++evals;
    if (s * s + t * t < opts.origin_exclusion * opts.origin_exclusion)
      return std::numeric_limits<double>::infinity();
    return sign * ratio_objective(which, p, s, t);
  };

  const int g = opts.grid_resolution;
  const double da = std::numbers::pi / g;
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 2> best_ab{0, 0};
  for (int i = 0; i < g; ++i) {
    const double a = -half_pi + (i + 0.5) * da;
    for (int j = 0; j < g; ++j) {
      const double b = -half_pi + (j + 0.5) * da;
      const double v = objective(a, b);
      if (v < best) {
        best = v;
        best_ab = {a, b};
      }
    }
  }

  const double edge = half_pi - 1e-12;
  auto clamped = [&](const std::array<double, 2> &ab) {
    return objective(std::clamp(ab[0], -edge, edge), std::clamp(ab[1], -edge, edge));
  };
  const auto nm = nelder_mead_2d(clamped, best_ab, da / 2, opts.refine_tol,
                                 opts.max_evaluations);
  const double refined = std::min(nm.value, best);
  const std::array<double, 2> ab = nm.value <= best ? nm.x : best_ab;

  ConstantEstimate est;
  est.which = which;
  est.p = p;
  est.argmin = {std::tan(std::clamp(ab[0], -edge, edge)),
                std::tan(std::clamp(ab[1], -edge, edge))};
  est.limit_at_infinity = 1.0; // numerator and denominator both ~ rho^p
  est.limit_at_origin = detail::origin_limit(which, p);
  est.converged = nm.converged;

  double value = sign * refined;
  for (double lim : {est.limit_at_infinity, est.limit_at_origin}) {
    if (sign * lim < sign * value) {
      value = lim;
      est.attained = false;
    }
  }
  est.value = value;
  est.evaluations = evals + nm.evaluations;

  double slack = 1e-8 * std::max(1.0, std::abs(value)) + 1e-2 * std::abs(best - refined);
  if (!nm.converged)
    slack = std::max(slack, std::abs(best - refined) + 1e-4 * std::max(1.0, std::abs(value)));
  // The inf (sup) is at most (least) any achieved value; slack goes on the
  // other side only.
  est.bracket = which == ConstantKind::c3 ? std::array<double, 2>{value, value + slack}
                                          : std::array<double, 2>{value - slack, value};
  return est;
}

struct LemmaCheck {
  ConstantKind which = ConstantKind::c1;
  double constant = 0;  // bound actually tested (bracket end)
  long violations = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = -std::numeric_limits<double>::infinity();
};

struct LemmaReport {
  double p = 0;
  int dim = 0;
  long samples = 0;
  std::vector<LemmaCheck> checks;
};

/// Samples random (xi, eta) in C^dim and tests each supplied constant's
/// inequality: C_p >= c1 |eta|^p, C_p >= c2 w and C_p <= c3 w with
/// w = |eta|^2 / (|xi| + |xi - eta|)^{2-p}. Lower bounds use the bracket's low
/// end, the upper bound its high end; a 1e-12 relative rounding allowance is
/// applied against the magnitude of the terms in C_p.
inline LemmaReport lemma_bound_check(double p, long n_samples, int dim,
                                     const std::vector<ConstantEstimate> &constants,
                                     std::uint64_t seed = 20240611) {
  require(dim >= 1 && dim <= kMaxDim, "lemma_bound_check: bad dimension");
  LemmaReport rep;
  rep.p = p;
  rep.dim = dim;
  rep.samples = n_samples;
  for (const auto &c : constants) {
    LemmaCheck chk;
    chk.which = c.which;
    chk.constant = c.which == ConstantKind::c3 ? c.bracket[1] : c.bracket[0];
    rep.checks.push_back(chk);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> logscale(-3.0, 3.0);
  auto random_vec = [&](double scale) {
    ComplexVec v(dim);
    for (int i = 0; i < dim; ++i)
      v[i] = scale * Complex(normal(rng), normal(rng));
    return v;
  };
  for (long k = 0; k < n_samples; ++k) {
    const ComplexVec d = random_vec(1.0);
    const ComplexVec eta = random_vec(std::pow(10.0, logscale(rng)));
    const ComplexVec xi = d + eta;
    const double cp = cp_eval(p, xi, eta);
    const double en = eta.norm();
    const double scale = std::pow(xi.norm(), p) + std::pow(d.norm(), p);
    const double allowance = 1e-12 * scale;
    for (auto &chk : rep.checks) {
      const double w = chk.which == ConstantKind::c1
                           ? std::pow(en, p)
                           : en * en / std::pow(xi.norm() + d.norm(), 2 - p);
      const double ratio = cp / w;
      chk.min_ratio = std::min(chk.min_ratio, ratio);
      chk.max_ratio = std::max(chk.max_ratio, ratio);
      const bool bad = chk.which == ConstantKind::c3 ? cp > chk.constant * w + allowance
                                                     : cp < chk.constant * w - allowance;
      if (bad)
        ++chk.violations;
    }
  }
  return rep;
}

} // namespace hardylab
