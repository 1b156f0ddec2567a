#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hardylab/types.hpp"

namespace hardylab {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussRule compute_gauss_legendre(int n) {
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    // recompute derivative at the converged root
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    const double w = 2 / ((1 - x * x) * dp * dp);
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    g.weights[i] = w;
    g.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1)
    g.nodes[n / 2] = 0.0;
  return g;
}

} // namespace detail

inline const GaussRule &gauss_legendre(int n) {
  require(n >= 1 && n <= 256, "gauss_legendre: unsupported number of points");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  return it->second;
}

/// Surface area of the unit sphere S^{k} in R^{k+1}.
inline double sphere_area(int k) {
  return 2 * std::pow(std::numbers::pi, (k + 1) / 2.0) / std::tgamma((k + 1) / 2.0);
}

/// Box [lo_i, hi_i] or origin-centred annulus r_in <= |x| <= r_out in R^dim.
///
/// Annuli are integrated in hyperspherical coordinates. When the integrand is
/// known to depend on x only through (x_1, ..., x_q, |x|) with q <= dim - 2,
/// setting `active_coords = q` integrates the trailing sphere S^{dim-q-1}
/// analytically, leaving a (q + 1)-dimensional parameter box.
struct IntegrationDomain {
  enum class Kind { box, annulus };
  Kind kind = Kind::box;
  int dim = 0;
  Vec lo, hi;
  double r_in = 0, r_out = 0;
  int active_coords = -1; // -1: full angular integration

  static IntegrationDomain box(Vec lo, Vec hi) {
    require(lo.size() == hi.size() && lo.size() >= 1, "box: bad bounds");
    require((lo.array() < hi.array()).all(), "box: requires lo_i < hi_i");
    IntegrationDomain d;
    d.kind = Kind::box;
    d.dim = static_cast<int>(lo.size());
    d.lo = std::move(lo);
    d.hi = std::move(hi);
    return d;
  }
  static IntegrationDomain annulus(int dim, double r_in, double r_out,
                                   int active_coords = -1) {
    require(dim >= 1 && dim <= kMaxDim, "annulus: bad dimension");
    require(r_in > 0 && r_in < r_out, "annulus: requires 0 < r_in < r_out");
    require(active_coords == -1 || (active_coords >= 0 && active_coords <= dim - 2),
            "annulus: active_coords must be -1 or in [0, dim - 2]");
    IntegrationDomain d;
    d.kind = Kind::annulus;
    d.dim = dim;
    d.r_in = r_in;
    d.r_out = r_out;
    d.active_coords = active_coords;
    return d;
  }

  /// Dimension of the parameter box actually integrated.
  int parameter_dim() const {
    if (kind == Kind::box)
      return dim;
    if (dim == 1)
      return 1;
    if (active_coords >= 0)
      return active_coords + 1;
    return dim;
  }
};

enum class BaseRule { gauss_legendre };

struct QuadratureSpec {
  BaseRule base_rule = BaseRule::gauss_legendre;
  int points_per_axis = 10;  // high-order rule; the comparison rule has 2 fewer
  int max_refine_depth = 40; // single-axis bisections along any path
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int initial_splits = 2;    // per axis, before adaptive refinement
};

/// Thrown when the integrand returns a non-finite value.
class QuadratureAbort : public std::runtime_error {
public:
  QuadratureAbort(const std::string &msg, Vec where)
      : std::runtime_error(msg), location(std::move(where)) {}
  Vec location;
};

/// Up to 16 simultaneously integrated components.
using Values = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 16, 1>;

struct QuadResult {
  Values value;
  Values err_est;
  bool converged = true;
  long cells = 0;
  long evaluations = 0;
};

struct ScalarQuadResult {
  double value = 0;
  double err_est = 0;
  bool converged = true;
  long cells = 0;
  long evaluations = 0;
};

namespace detail {

inline constexpr int kMaxParamDim = 5;

/// Maps a parameter point to one or two points x and their Jacobian weights.
template <class Sink>
void map_parameter(const IntegrationDomain &dom, const double *t, Sink &&sink) {
  Vec x(dom.dim);
  if (dom.kind == IntegrationDomain::Kind::box) {
    for (int i = 0; i < dom.dim; ++i)
      x[i] = t[i];
    sink(x, 1.0);
    return;
  }
  const double r = t[0];
  const int n = dom.dim;
  if (n == 1) {
    x[0] = r;
    sink(x, 1.0);
    x[0] = -r;
    sink(x, 1.0);
    return;
  }
  x.setZero();
  if (dom.active_coords >= 0) {
    const int q = dom.active_coords;
    double w = std::pow(r, n - 1) * sphere_area(n - q - 1);
    double prod = r;
    for (int k = 0; k < q; ++k) {
      const double th = t[1 + k];
      x[k] = prod * std::cos(th);
      w *= std::pow(std::sin(th), n - 2 - k);
      prod *= std::sin(th);
    }
    x[q] = prod;
    sink(x, w);
    return;
  }
  double w = std::pow(r, n - 1);
  double prod = r;
  for (int k = 0; k < n - 2; ++k) {
    const double th = t[1 + k];
    x[k] = prod * std::cos(th);
    w *= std::pow(std::sin(th), n - 2 - k);
    prod *= std::sin(th);
  }
  const double phi = t[n - 1];
  x[n - 2] = prod * std::cos(phi);
  x[n - 1] = prod * std::sin(phi);
  sink(x, w);
}

inline void parameter_box(const IntegrationDomain &dom, std::vector<double> &lo,
                          std::vector<double> &hi) {
  const int d = dom.parameter_dim();
  lo.assign(d, 0.0);
  hi.assign(d, 0.0);
  if (dom.kind == IntegrationDomain::Kind::box) {
    for (int i = 0; i < d; ++i) {
      lo[i] = dom.lo[i];
      hi[i] = dom.hi[i];
    }
    return;
  }
  lo[0] = dom.r_in;
  hi[0] = dom.r_out;
  for (int i = 1; i < d; ++i)
    hi[i] = std::numbers::pi;
  if (dom.active_coords < 0 && dom.dim >= 2)
    hi[d - 1] = 2 * std::numbers::pi;
}

struct Cell {
  std::array<double, kMaxParamDim> lo{}, hi{};
  int depth = 0;
};

/// Neumaier-compensated accumulator.
struct Accumulator {
  Values sum, comp;
  explicit Accumulator(int k) : sum(Values::Zero(k)), comp(Values::Zero(k)) {}
  void add(const Values &v) {
    for (int i = 0; i < sum.size(); ++i) {
      const double t = sum[i] + v[i];
      if (std::abs(sum[i]) >= std::abs(v[i]))
        comp[i] += (sum[i] - t) + v[i];
      else
        comp[i] += (v[i] - t) + sum[i];
      sum[i] = t;
    }
  }
  Values total() const { return sum + comp; }
};

template <class F> class CellIntegrator {
public:
  CellIntegrator(const F &f, const IntegrationDomain &dom, const QuadratureSpec &spec,
                 int ncomp)
      : f_(f), dom_(dom), d_(dom.parameter_dim()), ncomp_(ncomp),
        high_(gauss_legendre(spec.points_per_axis)),
        low_(gauss_legendre(std::max(1, spec.points_per_axis - 2))) {}

  struct Estimate {
    Values value;
    Values err;
    std::array<double, kMaxParamDim> axis_err{};
  };

  Estimate evaluate(const Cell &c) {
    Estimate e;
    e.value = tensor(c, -1);
    e.err = Values::Zero(ncomp_);
    for (int k = 0; k < d_; ++k) {
      const Values diff = (tensor(c, k) - e.value).cwiseAbs();
      e.err += diff;
      e.axis_err[k] = diff.maxCoeff();
    }
    return e;
  }

  long evaluations() const { return evaluations_; }

private:
  // Tensor rule with the high rule on every axis, except `low_axis` which uses
  // the comparison rule.
  Values tensor(const Cell &c, int low_axis) {
    std::array<const GaussRule *, kMaxParamDim> rules{};
    std::array<int, kMaxParamDim> idx{};
    std::array<double, kMaxParamDim> mid{}, half{};
    for (int k = 0; k < d_; ++k) {
      rules[k] = k == low_axis ? &low_ : &high_;
      mid[k] = 0.5 * (c.lo[k] + c.hi[k]);
      half[k] = 0.5 * (c.hi[k] - c.lo[k]);
    }
    Values acc = Values::Zero(ncomp_);
    std::array<double, kMaxParamDim> t{};
    while (true) {
      double w = 1.0;
      for (int k = 0; k < d_; ++k) {
        t[k] = mid[k] + half[k] * rules[k]->nodes[idx[k]];
        w *= half[k] * rules[k]->weights[idx[k]];
      }
      map_parameter(dom_, t.data(), [&](const Vec &x, double jac) {
        ++evaluations_;
        const Values v = f_(x);
        if (!v.allFinite()) {
          std::ostringstream os;
          os << "non-finite integrand at x = (" << x.transpose() << ")";
          throw QuadratureAbort(os.str(), x);
        }
        acc += (w * jac) * v;
      });
      int k = 0;
      while (k < d_ && ++idx[k] == static_cast<int>(rules[k]->nodes.size())) {
        idx[k] = 0;
        ++k;
      }
      if (k == d_)
        break;
    }
    return acc;
  }

  const F &f_;
  const IntegrationDomain &dom_;
  int d_;
  int ncomp_;
  const GaussRule &high_;
  const GaussRule &low_;
  long evaluations_ = 0;
};

} // namespace detail

/// Adaptive tensor Gauss-Legendre integration of a vector integrand
/// f: R^dim -> R^ncomp. Cells are bisected along the axis with the largest
/// two-order discrepancy until, for every component, the discrepancy is below
/// rel_tol times the cell value or the cell's volume share of
/// max(abs_tol, rel_tol * largest |global estimate| over components). Cells at max_depth are accepted and
/// the result is flagged non-converged. Summation follows depth-first order,
/// so results are deterministic.
template <class F>
QuadResult integrate_vector(const F &f, int ncomp, const IntegrationDomain &dom,
                            const QuadratureSpec &spec, int max_depth) {
  require(ncomp >= 1 && ncomp <= 16, "integrate: 1..16 components supported");
  require(spec.points_per_axis >= 2, "QuadratureSpec: points_per_axis must be >= 2");
  require(spec.rel_tol > 0 && spec.abs_tol > 0, "QuadratureSpec: tolerances must be positive");
  require(spec.initial_splits >= 1, "QuadratureSpec: initial_splits must be >= 1");
  const int d = dom.parameter_dim();
  require(d <= detail::kMaxParamDim,
          "integrate: parameter dimension above 5 (use active_coords for annuli)");

  std::vector<double> plo, phi;
  detail::parameter_box(dom, plo, phi);
  double root_volume = 1.0;
  for (int k = 0; k < d; ++k)
    root_volume *= phi[k] - plo[k];

  detail::CellIntegrator<F> integ(f, dom, spec, ncomp);

  // initial partition
  std::vector<detail::Cell> initial;
  {
    const int s = spec.initial_splits;
    std::array<int, detail::kMaxParamDim> idx{};
    while (true) {
      detail::Cell c;
      for (int k = 0; k < d; ++k) {
        const double w = (phi[k] - plo[k]) / s;
        c.lo[k] = plo[k] + idx[k] * w;
        c.hi[k] = idx[k] + 1 == s ? phi[k] : plo[k] + (idx[k] + 1) * w;
      }
      initial.push_back(c);
      int k = 0;
      while (k < d && ++idx[k] == s) {
        idx[k] = 0;
        ++k;
      }
      if (k == d)
        break;
    }
  }

  using Est = typename detail::CellIntegrator<F>::Estimate;
  std::vector<Est> initial_est;
  initial_est.reserve(initial.size());
  Values global = Values::Zero(ncomp);
  for (const auto &c : initial) {
    initial_est.push_back(integ.evaluate(c));
    global += initial_est.back().value;
  }

  detail::Accumulator value(ncomp), err(ncomp);
  QuadResult res;
  auto cell_volume = [&](const detail::Cell &c) {
    double v = 1.0;
    for (int k = 0; k < d; ++k)
      v *= c.hi[k] - c.lo[k];
    return v;
  };
  // Components share one global scale, so a component that is small next to
  // the others is resolved relative to the largest one.
  const double global_scale = global.cwiseAbs().maxCoeff();
  auto acceptable = [&](const detail::Cell &c, const Est &e) {
    const double share = cell_volume(c) / root_volume;
    for (int i = 0; i < ncomp; ++i) {
      const double tol = std::max(spec.rel_tol * std::abs(e.value[i]),
                                  share * std::max(spec.abs_tol, spec.rel_tol * global_scale));
      if (e.err[i] > tol)
        return false;
    }
    return true;
  };

  // Depth-first refinement with an explicit stack; children are pushed so
  // that the lower half is processed first.
  std::vector<std::pair<detail::Cell, Est>> stack;
  for (std::size_t i = initial.size(); i-- > 0;)
    stack.emplace_back(initial[i], initial_est[i]);
  while (!stack.empty()) {
    auto [c, e] = stack.back();
    stack.pop_back();
    const bool ok = acceptable(c, e);
    if (ok || c.depth >= max_depth) {
      if (!ok)
        res.converged = false;
      value.add(e.value);
      err.add(e.err);
      ++res.cells;
      continue;
    }
    int axis = 0;
    for (int k = 1; k < d; ++k)
      if (e.axis_err[k] > e.axis_err[axis])
        axis = k;
    detail::Cell a = c, b = c;
    const double m = 0.5 * (c.lo[axis] + c.hi[axis]);
    a.hi[axis] = m;
    b.lo[axis] = m;
    a.depth = b.depth = c.depth + 1;
    Est ea = integ.evaluate(a);
    Est eb = integ.evaluate(b);
    stack.emplace_back(b, std::move(eb));
    stack.emplace_back(a, std::move(ea));
  }
  res.value = value.total();
  res.err_est = err.total();
  res.evaluations = integ.evaluations();
  return res;
}

/// Single pass of the tensor rule over the initial partition (no adaptive
/// refinement); err_est compares the two rule orders.
template <class F>
ScalarQuadResult integrate(const F &f, const IntegrationDomain &dom,
                           const QuadratureSpec &spec = {}) {
  auto g = [&](const Vec &x) {
    Values v(1);
    v[0] = f(x);
    return v;
  };
  const QuadResult r = integrate_vector(g, 1, dom, spec, 0);
  return {r.value[0], r.err_est[0], r.converged, r.cells, r.evaluations};
}

/// Recursive bisection until every accepted cell meets rel_tol (see
/// integrate_vector); flags non-convergence when max_depth is exhausted.
template <class F>
ScalarQuadResult refine_until(const F &f, const IntegrationDomain &dom, double rel_tol,
                              int max_depth, QuadratureSpec spec = {}) {
  spec.rel_tol = rel_tol;
  auto g = [&](const Vec &x) {
    Values v(1);
    v[0] = f(x);
    return v;
  };
  const QuadResult r = integrate_vector(g, 1, dom, spec, max_depth);
  return {r.value[0], r.err_est[0], r.converged, r.cells, r.evaluations};
}

} // namespace hardylab
