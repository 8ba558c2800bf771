#pragma once

#include "rismec/types.hpp"

#include <functional>
#include <string>

namespace rismec {

/// Returns f(x) and writes the gradient into *grad when grad != nullptr.
/// Points outside the domain should return +inf; they are treated as a
/// failed trial and trigger a backtrack.
using ObjectiveGrad = std::function<double(const rvec& x, rvec* grad)>;

struct ArmijoOptions {
  double c_armijo = 1e-4;
  double backtrack = 0.5;
  int max_iters = 500;
  double grad_tol = 1e-6;
  double initial_step = 1.0;
  int max_backtracks = 80;
  /// Barzilai-Borwein trial step (still accepted only under the Armijo test).
  bool bb_step = true;
};

enum class ArmijoStatus { converged, max_iters, stalled, aborted };

struct ArmijoResult {
  rvec x;
  double f = 0.0;
  int iterations = 0;
  ArmijoStatus status = ArmijoStatus::max_iters;
  double last_step = 0.0;
  std::string diagnostic;
};

/// Gradient descent with backtracking; iterates never increase f.
/// NaN at any evaluated point aborts with a diagnostic.
ArmijoResult armijo_descent(const ObjectiveGrad& fg, const rvec& x0, const ArmijoOptions& opts = {});

}  // namespace rismec
