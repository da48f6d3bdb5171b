#pragma once

#include <cstddef>
#include <vector>

#include "circot/circular_ot.hpp"
#include "circot/histogram.hpp"
#include "circot/matrix.hpp"

namespace circot {

struct SinkhornOptions {
  double reg = 0.0;        // absolute regularization; <= 0 picks reg_scale * max(cost)
  double reg_scale = 0.01;
  std::size_t max_iters = 10000;
  double tol = 1e-9;       // L1 marginal violation
  double mass_floor = 1e-12;
  bool track_violations = false;
};

struct SinkhornResult {
  LossValue loss;  // solver_tag "sinkhorn"
  std::size_t iterations = 0;
  double final_violation = 0.0;
  std::vector<double> violations;  // per-iteration, when tracked
};

// Entropically regularized transport cost. Scaling updates run in log domain;
// after convergence the plan is rounded onto the exact marginal polytope, so
// the reported cost is that of a feasible plan and can never undercut the LP
// optimum. Throws NotConverged if the marginal violation fails to reach tol
// within max_iters.
SinkhornResult sinkhorn_approx(const Histogram& s, const Histogram& t, const Matrix& cost,
                               const SinkhornOptions& opts = {});

}  // namespace circot
