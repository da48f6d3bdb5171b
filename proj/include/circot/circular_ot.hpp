#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "circot/ground_metric.hpp"
#include "circot/histogram.hpp"

namespace circot {

struct LossValue {
  double value = 0.0;
  std::string solver_tag;
  // Optimal transport constant: the median of the prefix differences for the
  // linear solver, the cut offset in [-1, 1] for the convex solver.
  std::optional<double> alpha_star;
};

// Number of unit masses in the quantile discretization; grid resolution for
// the cut search is 1/m.
struct QuantilePrecision {
  std::uint64_t m;
  explicit QuantilePrecision(std::uint64_t m_) : m(m_) {
    if (m < 2 || m > (std::uint64_t{1} << 60))
      fail(errc::bad_parameter, "precision must be in [2, 2^60]");
  }
};

inline constexpr std::uint64_t kDefaultCutGrid = 100'000'000;

// Target is a single unit mass at j_star: the plan is forced, the loss is the
// f-weighted average distance to j_star.
LossValue one_hot_loss(const Histogram& s, std::size_t j_star, const GroundMetricSpec& spec);
std::vector<double> one_hot_grad(const Histogram& s, std::size_t j_star,
                                 const GroundMetricSpec& spec);

// Like one_hot_loss but against an arbitrary cost matrix column (used when the
// ground matrix is learned rather than a function of arc length).
LossValue one_hot_loss(const Histogram& s, std::size_t j_star, const Matrix& cost);
std::vector<double> one_hot_grad(const Histogram& s, std::size_t j_star, const Matrix& cost);

// Arc-length ground distance: loss is sum_j |phi_j - alpha*| where
// phi_j = prefix_s(j) - prefix_t(j) and alpha* is the (lower) median of the
// phi values.
LossValue linear_circular(const Histogram& s, const Histogram& t);

// Subgradient with alpha* held fixed at the computed median:
// component n = sum_{j >= n} sgn(phi_j - alpha*), with sgn(0) = 0.
std::vector<double> linear_circular_grad(const Histogram& s, const Histogram& t);

// Any convex increasing f: minimizes the line transport cost between quantile
// functions over cut offsets alpha in [-1, 1], evaluated exactly per offset by
// merging the <= 2N breakpoints of the two piecewise-constant quantiles. The
// offset search is a ternary search on the 1/m grid (the cost is convex in the
// offset) followed by an exact scan of the breakpoint-collision offsets next
// to the best grid point.
LossValue convex_circular(const Histogram& s, const Histogram& t, const GroundMetricSpec& spec,
                          QuantilePrecision prec = QuantilePrecision(kDefaultCutGrid));

// Subgradient with the cut offset held fixed: differentiates the segment
// geometry of the optimal cut with respect to the source prefix breakpoints.
std::vector<double> convex_circular_grad(const Histogram& s, const Histogram& t,
                                         const GroundMetricSpec& spec,
                                         QuantilePrecision prec = QuantilePrecision(kDefaultCutGrid));

// Loss and subgradient from a single cut search; training loops call this per
// sample, where running the search twice would double the cost.
LossValue convex_circular_with_grad(const Histogram& s, const Histogram& t,
                                    const GroundMetricSpec& spec, std::vector<double>& grad,
                                    QuantilePrecision prec = QuantilePrecision(kDefaultCutGrid));

// Non-periodic axis: cost of the monotone (quantile) matching for any
// increasing f. Coincides with the optimal transport cost when f is convex.
LossValue line_wasserstein(const Histogram& s, const Histogram& t, const GroundMetricSpec& spec);

// Step ground distance: half the L1 distance between the histograms.
LossValue step_l1(const Histogram& s, const Histogram& t);

// Worst-case quantization error of the cut search against the true optimum:
// the offset grid has resolution 1/m, and a unit of offset sweeps at most 2n
// quantile segments each costing at most f(n/2).
inline double cut_quantization_bound(const GroundMetricSpec& spec, std::size_t n,
                                     std::uint64_t m) {
  return apply_metric(spec, double(n) / 2.0) * (2.0 * double(n) / double(m));
}

// Routes to the fastest applicable solver: one-hot targets short-circuit, the
// linear metric uses the median form, convex metrics the cut search, step the
// L1 form; anything else (chord, concave powers) falls back to the exact LP.
LossValue dispatch_loss(const Histogram& s, const Histogram& t, const GroundMetricSpec& spec,
                        QuantilePrecision prec = QuantilePrecision(kDefaultCutGrid));
LossValue dispatch_loss(const Histogram& s, std::size_t j_star, const GroundMetricSpec& spec);

namespace detail {

// Raw-span cores used by finite-difference checks; spans need not be
// normalized. Levels above the final source prefix fall into the last bin.
double one_hot_raw(std::span<const double> s, std::size_t j_star, const GroundMetricSpec& spec);
double linear_circular_raw(std::span<const double> s, std::span<const double> t,
                           double* alpha_out = nullptr);

// Line transport cost between the quantile functions with the target levels
// shifted by alpha in [-1, 1]; the mass axis runs over (0, 1].
double cut_cost_raw(std::span<const double> s, std::span<const double> t,
                    const GroundMetricSpec& spec, double alpha);

double convex_circular_raw(std::span<const double> s, std::span<const double> t,
                           const GroundMetricSpec& spec, std::uint64_t grid,
                           double* alpha_out = nullptr);

}  // namespace detail

}  // namespace circot
