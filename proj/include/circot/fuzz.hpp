#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circot/histogram.hpp"

namespace circot {

// Randomized equivalence suite: every fast solver is replayed against the
// exact LP on random histogram pairs and the worst absolute gap is recorded.
struct FuzzOptions {
  std::size_t cases = 500;  // pairs per histogram size
  std::vector<std::size_t> sizes = {3, 4, 5, 8, 13, 16};
  std::uint64_t grid = 1'000'000;  // cut-search resolution under test
  std::uint64_t seed = 1;
  std::vector<std::string> solvers;  // empty = all checks
};

struct SolverGap {
  std::string solver;
  std::size_t cases = 0;
  double max_gap = 0.0;
  double tolerance = 0.0;
  std::size_t violations = 0;
  std::string worst_case;
};

struct FuzzReport {
  std::vector<SolverGap> per_solver;
  bool ok() const {
    for (const SolverGap& g : per_solver)
      if (g.violations > 0) return false;
    return true;
  }
};

// Check names: linear, step, one_hot, convex, line, cross.
FuzzReport run_fuzz(const FuzzOptions& opt);

// Random normalized histogram with exponential bin masses; roughly a third of
// the draws are sparsified to exercise empty bins.
Histogram random_histogram(std::size_t n, class Rng& rng);

}  // namespace circot
