#include "circot/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace circot {

namespace {

// positive floor plus renormalization; Sinkhorn needs strictly positive marginals
std::vector<double> floored(std::span<const double> v, double floor_at) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x = std::max(x, floor_at);
  double sum = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& x : out) x /= sum;
  return out;
}

}  // namespace

SinkhornResult sinkhorn_approx(const Histogram& s, const Histogram& t, const Matrix& cost,
                               const SinkhornOptions& opts) {
  const std::size_t n = s.size();
  const std::size_t m = t.size();
  if (cost.rows != n || cost.cols != m) fail(errc::dimension_mismatch, "cost matrix shape");
  if (opts.mass_floor <= 0.0) fail(errc::bad_parameter, "mass floor must be positive");

  double reg = opts.reg;
  if (reg <= 0.0) reg = opts.reg_scale * cost.max_value();
  if (reg <= 0.0) fail(errc::bad_parameter, "regularization must be positive");

  const std::vector<double> a = floored(s.values(), opts.mass_floor);
  const std::vector<double> b = floored(t.values(), opts.mass_floor);
  std::vector<double> log_a(n), log_b(m);
  for (std::size_t i = 0; i < n; ++i) log_a[i] = std::log(a[i]);
  for (std::size_t j = 0; j < m; ++j) log_b[j] = std::log(b[j]);

  std::vector<double> lk(n * m);  // -cost/reg
  for (std::size_t i = 0; i < n * m; ++i) lk[i] = -cost.data[i] / reg;

  std::vector<double> u(n, 0.0), v(m, 0.0);
  std::vector<double> colmax(m), colacc(m);

  SinkhornResult res;
  bool converged = false;
  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    // row scaling: exact row marginals afterwards
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = lk.data() + i * m;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, row[j] + v[j]);
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += std::exp(row[j] + v[j] - mx);
      u[i] = log_a[i] - (mx + std::log(acc));
    }
    // column scaling; the pre-update column sums drop out of the same sweep
    std::fill(colmax.begin(), colmax.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = lk.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) colmax[j] = std::max(colmax[j], row[j] + u[i]);
    }
    std::fill(colacc.begin(), colacc.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = lk.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) colacc[j] += std::exp(row[j] + u[i] - colmax[j]);
    }
    double violation = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double lse = colmax[j] + std::log(colacc[j]);
      violation += std::abs(b[j] * std::expm1(v[j] + lse - log_b[j]));
      v[j] = log_b[j] - lse;
    }
    if (!std::isfinite(violation)) fail(errc::numerical_failure, "scaling diverged");
    if (opts.track_violations) res.violations.push_back(violation);
    res.iterations = it;
    res.final_violation = violation;
    if (violation < opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    fail(errc::not_converged, "marginal violation " + std::to_string(res.final_violation) +
                                  " after " + std::to_string(res.iterations) + " iterations");

  // Build the plan and round it onto the exact (s, t) marginals: scale rows
  // down, then columns, then spread the leftover as a rank-one patch.
  Matrix plan(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) plan.at(i, j) = std::exp(u[i] + lk[i * m + j] + v[j]);

  std::vector<double> rowsum(n, 0.0), colsum(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) rowsum[i] += plan.at(i, j);
  for (std::size_t i = 0; i < n; ++i) {
    double scale = rowsum[i] > s[i] ? s[i] / rowsum[i] : 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      plan.at(i, j) *= scale;
      colsum[j] += plan.at(i, j);
    }
  }
  for (std::size_t j = 0; j < m; ++j)
    colsum[j] = colsum[j] > t[j] ? t[j] / colsum[j] : 1.0;  // reuse as column scale
  std::fill(rowsum.begin(), rowsum.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      plan.at(i, j) *= colsum[j];
      rowsum[i] += plan.at(i, j);
    }
  std::vector<double> def_r(n), def_c(m);
  double missing = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    def_r[i] = std::max(0.0, s[i] - rowsum[i]);
    missing += def_r[i];
  }
  std::fill(colsum.begin(), colsum.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) colsum[j] += plan.at(i, j);
  for (std::size_t j = 0; j < m; ++j) def_c[j] = std::max(0.0, t[j] - colsum[j]);
  if (missing > 0.0)
    for (std::size_t i = 0; i < n; ++i) {
      if (def_r[i] == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j)
        plan.at(i, j) += def_r[i] * def_c[j] / missing;
    }

  double value = 0.0;
  for (std::size_t i = 0; i < n * m; ++i) value += plan.data[i] * cost.data[i];
  if (!std::isfinite(value)) fail(errc::numerical_failure, "cost overflow");

  res.loss = {value, "sinkhorn", std::nullopt};
  return res;
}

}  // namespace circot
