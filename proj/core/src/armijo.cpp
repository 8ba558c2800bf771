#include "rismec/armijo.hpp"

#include <cmath>

namespace rismec {

ArmijoResult armijo_descent(const ObjectiveGrad& fg, const rvec& x0, const ArmijoOptions& opts) {
  ArmijoResult res;
  res.x = x0;
  rvec g(x0.size());
  res.f = fg(res.x, &g);
  if (!std::isfinite(res.f) || !g.allFinite()) {
    res.status = ArmijoStatus::aborted;
    res.diagnostic = "objective or gradient not finite at the starting point";
    return res;
  }
  double step = opts.initial_step;
  rvec x_prev, g_prev;
  for (int it = 1; it <= opts.max_iters; ++it) {
    res.iterations = it;
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      res.status = ArmijoStatus::converged;
      return res;
    }
    if (opts.bb_step && it > 1) {
      const rvec sdiff = res.x - x_prev;
      const rvec ydiff = g - g_prev;
      const double sy = sdiff.dot(ydiff);
      if (sy > 0) step = sdiff.squaredNorm() / sy;
    }
    const double slope = g.squaredNorm();
    bool accepted = false;
    rvec xt, gt(x0.size());
    double ft = 0.0;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      xt = res.x - step * g;
      ft = fg(xt, &gt);
      if (std::isnan(ft) || (std::isfinite(ft) && !gt.allFinite())) {
        res.status = ArmijoStatus::aborted;
        res.diagnostic = "objective or gradient returned NaN during line search";
        return res;
      }
      if (std::isfinite(ft) && ft <= res.f - opts.c_armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      res.status = ArmijoStatus::stalled;
      res.diagnostic = "line search found no acceptable step";
      return res;
    }
    x_prev = res.x;
    g_prev = g;
    res.x = xt;
    res.f = ft;
    g = gt;
    res.last_step = step;
    step *= 2.0;
  }
  res.status = g.lpNorm<Eigen::Infinity>() <= opts.grad_tol ? ArmijoStatus::converged
                                                            : ArmijoStatus::max_iters;
  return res;
}

}  // namespace rismec
