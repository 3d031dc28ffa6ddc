#pragma once

// Monotone projected gradient descent shared by the rating and predictor fits.

#include <functional>
#include <vector>

namespace arena::optim {

struct Optimum {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&, std::vector<double>*)>;
using Projection = std::function<void(std::vector<double>&)>;
// Size of the (projected) gradient at x; the run stops once it drops below tol.
using Stationarity = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

// Barzilai-Borwein steps; a step is accepted only if it does not increase the
// objective, halving until it does. `trace` receives every accepted value.
Optimum minimize(const Objective& eval, const Projection& project, const Stationarity& stationarity,
                 std::vector<double> x, double step, double tol, int max_iter, std::vector<double>* trace = nullptr);

// Max-abs gradient, for unconstrained problems.
double max_abs_gradient(const std::vector<double>& x, const std::vector<double>& g);

}  // namespace arena::optim
