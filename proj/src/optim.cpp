#include "arena/optim.hpp"

#include <algorithm>
#include <cmath>

namespace arena::optim {

Optimum minimize(const Objective& eval, const Projection& project, const Stationarity& stationarity,
                 std::vector<double> x, double step, double tol, int max_iter, std::vector<double>* trace) {
  const std::size_t n = x.size();
  project(x);
  std::vector<double> g(n), g_new(n), x_new(n);
  double f = eval(x, &g);
  Optimum out;
  if (trace) trace->push_back(f);
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it;
    if (stationarity(x, g) < tol) {
      out.converged = true;
      break;
    }
    double f_new = f;
    bool accepted = false;
    for (int halving = 0; halving < 80; ++halving) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] - step * g[i];
      project(x_new);
      f_new = eval(x_new, &g_new);
      if (std::isfinite(f_new) && f_new <= f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No decrease available at machine precision: as good as it gets.
      out.converged = stationarity(x, g) < std::sqrt(tol);
      break;
    }
    double ss = 0.0, sy = 0.0, moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = x_new[i] - x[i];
      const double y = g_new[i] - g[i];
      ss += s * s;
      sy += s * y;
      moved = std::max(moved, std::abs(s));
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    if (trace) trace->push_back(f);
    if (moved == 0.0) {
      out.converged = stationarity(x, g) < std::sqrt(tol);
      break;
    }
    step = sy > 0.0 ? ss / sy : step * 2.0;
    out.iterations = it + 1;
  }
  out.x = std::move(x);
  out.f = f;
  return out;
}

double max_abs_gradient(const std::vector<double>&, const std::vector<double>& g) {
  double worst = 0.0;
  for (double v : g) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace arena::optim
