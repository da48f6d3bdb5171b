#include "circot/fuzz.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "circot/circular_ot.hpp"
#include "circot/error.hpp"
#include "circot/ground_metric.hpp"
#include "circot/rng.hpp"
#include "circot/transport_lp.hpp"

namespace circot {

Histogram random_histogram(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = -std::log(rng.uniform_pos());
  if (rng.uniform() < 0.35) {
    bool any = false;
    for (double& x : v) {
      if (rng.bernoulli(0.5))
        x = 0.0;
      else
        any = true;
    }
    if (!any) v[rng.uniform_int(n)] = 1.0;
  }
  return Histogram::make(std::move(v), true);
}

namespace {

const char* const kCheckNames[] = {"linear", "step", "one_hot", "convex", "line", "cross"};

struct Check {
  SolverGap gap;

  Check(const char* name, double tolerance) {
    gap.solver = name;
    gap.tolerance = tolerance;
  }

  void record(double g, std::size_t n, std::size_t case_idx) {
    ++gap.cases;
    if (g > gap.max_gap) {
      gap.max_gap = g;
      gap.worst_case = "n=" + std::to_string(n) + " case=" + std::to_string(case_idx);
    }
    if (g > gap.tolerance) ++gap.violations;
  }
};

bool enabled(const FuzzOptions& opt, const char* name) {
  if (opt.solvers.empty()) return true;
  return std::find(opt.solvers.begin(), opt.solvers.end(), name) != opt.solvers.end();
}

}  // namespace

FuzzReport run_fuzz(const FuzzOptions& opt) {
  if (opt.cases == 0) fail(errc::bad_parameter, "need at least one case");
  if (opt.sizes.empty()) fail(errc::bad_parameter, "need at least one histogram size");
  for (const std::size_t n : opt.sizes)
    if (n < 2) fail(errc::bad_parameter, "histogram sizes must be at least 2");
  for (const std::string& s : opt.solvers)
    if (std::find(std::begin(kCheckNames), std::end(kCheckNames), s) == std::end(kCheckNames))
      fail(errc::bad_parameter, "unknown solver check '" + s + "'");

  Check c_linear("linear", 1e-6);
  Check c_step("step", 1e-9);
  Check c_onehot("one_hot", 1e-9);
  // The convex and cross checks have size-dependent quantization bounds, so
  // they record the gap as a fraction of the bound.
  Check c_convex("convex", 1.0);
  Check c_line("line", 1e-6);
  Check c_cross("cross", 1.0);

  const GroundMetricSpec m_lin = GroundMetricSpec::linear();
  const GroundMetricSpec m_p2 = GroundMetricSpec::power(2.0);
  const GroundMetricSpec m_p3 = GroundMetricSpec::power(3.0);
  const GroundMetricSpec m_ph = GroundMetricSpec::power(0.5);
  const GroundMetricSpec m_h2 = GroundMetricSpec::huber(2.0);
  const GroundMetricSpec m_st = GroundMetricSpec::step();

  Rng rng(opt.seed);
  const QuantilePrecision prec(opt.grid);

  for (const std::size_t n : opt.sizes) {
    const GroundMetricSpec m_ch = GroundMetricSpec::chord(n);
    const Matrix g_lin = ground_matrix(m_lin, n);
    const Matrix g_p2 = ground_matrix(m_p2, n);
    const Matrix g_p3 = ground_matrix(m_p3, n);
    const Matrix g_ph = ground_matrix(m_ph, n);
    const Matrix g_h2 = ground_matrix(m_h2, n);
    const Matrix g_st = ground_matrix(m_st, n);
    const Matrix g_ch = ground_matrix(m_ch, n);
    const Matrix g_line = line_matrix(m_lin, n);

    const std::pair<const GroundMetricSpec*, const Matrix*> onehot_set[] = {
        {&m_lin, &g_lin}, {&m_p2, &g_p2}, {&m_ph, &g_ph},
        {&m_h2, &g_h2},   {&m_ch, &g_ch}, {&m_st, &g_st}};
    const std::pair<const GroundMetricSpec*, const Matrix*> convex_set[] = {
        {&m_p2, &g_p2}, {&m_p3, &g_p3}, {&m_h2, &g_h2}};

    for (std::size_t c = 0; c < opt.cases; ++c) {
      const Histogram s = random_histogram(n, rng);
      const Histogram t = random_histogram(n, rng);
      const std::size_t j_star = rng.uniform_int(n);

      if (enabled(opt, "linear")) {
        const double fast = linear_circular(s, t).value;
        const double exact = lp_exact(s, t, g_lin).loss.value;
        c_linear.record(std::fabs(fast - exact), n, c);
      }
      if (enabled(opt, "step")) {
        const double fast = step_l1(s, t).value;
        const double exact = lp_exact(s, t, g_st).loss.value;
        c_step.record(std::fabs(fast - exact), n, c);
      }
      if (enabled(opt, "one_hot")) {
        const Histogram tt = Histogram::one_hot(n, j_star);
        double worst = 0.0;
        for (const auto& [spec, cost] : onehot_set) {
          const double fast = one_hot_loss(s, j_star, *spec).value;
          const double exact = lp_exact(s, tt, *cost).loss.value;
          worst = std::max(worst, std::fabs(fast - exact));
        }
        c_onehot.record(worst, n, c);
      }
      if (enabled(opt, "convex")) {
        double worst = 0.0;
        for (const auto& [spec, cost] : convex_set) {
          const double fast = convex_circular(s, t, *spec, prec).value;
          const double exact = lp_exact(s, t, *cost).loss.value;
          const double bound = cut_quantization_bound(*spec, n, opt.grid);
          worst = std::max(worst, std::fabs(fast - exact) / bound);
        }
        c_convex.record(worst, n, c);
      }
      if (enabled(opt, "line")) {
        const double fast = line_wasserstein(s, t, m_lin).value;
        const double exact = lp_exact(s, t, g_line).loss.value;
        c_line.record(std::fabs(fast - exact), n, c);
      }
      if (enabled(opt, "cross")) {
        const double median_form = linear_circular(s, t).value;
        const double cut_form = convex_circular(s, t, m_lin, prec).value;
        const double bound = cut_quantization_bound(m_lin, n, opt.grid);
        c_cross.record(std::fabs(median_form - cut_form) / bound, n, c);
      }
    }
  }

  FuzzReport report;
  for (Check* c : {&c_linear, &c_step, &c_onehot, &c_convex, &c_line, &c_cross})
    if (c->gap.cases > 0) report.per_solver.push_back(std::move(c->gap));
  return report;
}

}  // namespace circot
