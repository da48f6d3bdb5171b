#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "circot/error.hpp"
#include "circot/matrix.hpp"

namespace circot {

// Increasing functions f(d) of the circular bin distance, f(0) = 0.
enum class MetricKind { linear, power, huber, chord, step };

struct GroundMetricSpec {
  MetricKind kind = MetricKind::linear;
  double rho = 1.0;        // power exponent
  double tau = 1.0;        // huber knee
  std::size_t n_bins = 0;  // chord only: circle radius is n_bins / (2*pi)

  static GroundMetricSpec linear() { return {}; }
  static GroundMetricSpec power(double rho);
  static GroundMetricSpec huber(double tau);
  static GroundMetricSpec chord(std::size_t n_bins);
  static GroundMetricSpec step() { return {MetricKind::step, 1.0, 1.0, 0}; }

  // Convex as a function of distance on [0, N]; the fast cut-search solver
  // requires this.
  bool convex() const;
  std::string name() const;
};

// Shorter arc between bins i and j on an N-cycle: min(|i-j|, N-|i-j|).
std::size_t arc_length(std::size_t i, std::size_t j, std::size_t n);

// f(d) for d >= 0. Distances beyond N/2 arise on the universal cover during
// the cut search and are evaluated with the same formula.
double apply_metric(const GroundMetricSpec& spec, double d);

// N x N cost matrix D[i][j] = f(arc_length(i, j, N)).
Matrix ground_matrix(const GroundMetricSpec& spec, std::size_t n);

// Non-periodic variant: D[i][j] = f(|i - j|).
Matrix line_matrix(const GroundMetricSpec& spec, std::size_t n);

// Pairwise L1 distances between per-class centroids of feature vectors.
// features_by_class[c] lists the (already normalized) penultimate-layer
// responses observed for class c.
Matrix centroid_distances(const std::vector<std::vector<std::vector<double>>>& features_by_class);

// D = (f(d_bar) + w * f(d_arc)) / (1 + w), the annealed mix of a learned
// feature distance with the fixed arc distance. When rescale is set, d_bar is
// scaled so its maximum matches the largest arc length floor(N/2) before f is
// applied, keeping the two terms commensurate.
Matrix blend_adaptive(const Matrix& d_bar, const GroundMetricSpec& spec, double blend_weight,
                      bool rescale = true);

}  // namespace circot
