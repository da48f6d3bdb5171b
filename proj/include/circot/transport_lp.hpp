#pragma once

#include <vector>

#include "circot/circular_ot.hpp"
#include "circot/histogram.hpp"
#include "circot/matrix.hpp"

namespace circot {

struct TransportPlan {
  Matrix flows;  // flows.at(i, j) = mass moved from source bin i to target bin j
};

struct LpSolution {
  LossValue loss;  // solver_tag "lp_exact"
  TransportPlan plan;
  // Optimal duals: source_potential[i] + sink_potential[j] <= cost(i, j)
  // everywhere, with equality on every flow-carrying pair.
  std::vector<double> source_potential;
  std::vector<double> sink_potential;
};

// Exact minimum-cost transport between the histograms under an arbitrary
// nonnegative cost matrix, via successive shortest augmenting paths with
// node potentials. Moves min(total_s, total_t) mass; row sums never exceed
// the supplies, column sums never exceed the demands.
LpSolution lp_exact(const Histogram& s, const Histogram& t, const Matrix& cost);

}  // namespace circot
