#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace hardylab {

struct NelderMeadResult {
  std::array<double, 2> x{};
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Two-dimensional Nelder-Mead minimizer with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). Stops when the
/// simplex diameter falls below `xtol`.
template <class F>
NelderMeadResult nelder_mead_2d(const F &f, std::array<double, 2> x0, double step,
                                double xtol, int max_evaluations) {
  using P = std::array<double, 2>;
  struct Vertex {
    P x;
    double f;
  };
  int evals = 0;
  auto eval = [&](const P &p) {
    ++evals;
    return f(p);
  };
  std::array<Vertex, 3> s{{{x0, 0}, {{x0[0] + step, x0[1]}, 0}, {{x0[0], x0[1] + step}, 0}}};
  for (auto &v : s)
    v.f = eval(v.x);

  auto lerp = [](const P &a, const P &b, double t) {
    return P{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
  };
  auto diameter = [&] {
    double d = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        d = std::max(d, std::hypot(s[i].x[0] - s[j].x[0], s[i].x[1] - s[j].x[1]));
    return d;
  };

  bool converged = false;
  while (evals < max_evaluations) {
    std::stable_sort(s.begin(), s.end(),
                     [](const Vertex &a, const Vertex &b) { return a.f < b.f; });
    if (diameter() < xtol) {
      converged = true;
      break;
    }
    const P centroid{(s[0].x[0] + s[1].x[0]) / 2, (s[0].x[1] + s[1].x[1]) / 2};
    const P xr = lerp(centroid, s[2].x, -1.0);
    const double fr = eval(xr);
    if (fr < s[0].f) {
      const P xe = lerp(centroid, s[2].x, -2.0);
      const double fe = eval(xe);
      s[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      continue;
    }
    if (fr < s[1].f) {
      s[2] = {xr, fr};
      continue;
    }
    const bool outside = fr < s[2].f;
    const P xc = outside ? lerp(centroid, xr, 0.5) : lerp(centroid, s[2].x, 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : s[2].f)) {
      s[2] = {xc, fc};
      continue;
    }
    for (int i = 1; i < 3; ++i) {
      s[i].x = lerp(s[0].x, s[i].x, 0.5);
      s[i].f = eval(s[i].x);
    }
  }
  std::stable_sort(s.begin(), s.end(),
                   [](const Vertex &a, const Vertex &b) { return a.f < b.f; });
  return {s[0].x, s[0].f, evals, converged};
}

} // namespace hardylab
