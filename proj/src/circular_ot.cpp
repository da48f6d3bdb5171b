#include "circot/circular_ot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "circot/transport_lp.hpp"

namespace circot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(const Histogram& s, const Histogram& t) {
  if (s.size() != t.size())
    fail(errc::length_mismatch,
         std::to_string(s.size()) + " source bins vs " + std::to_string(t.size()) + " target bins");
}

void check_normalized(const Histogram& h, const char* role) {
  if (!h.normalized()) fail(errc::bad_parameter, std::string(role) + " histogram is not normalized");
}

// Cumulative distribution with zero-mass bins dropped: lev is strictly
// increasing, bin[k] owns the mass levels (lev[k-1], lev[k]].
struct CompactCdf {
  std::vector<double> lev;
  std::vector<long> bin;
};

CompactCdf compact_cdf(std::span<const double> v) {
  CompactCdf c;
  double run = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] > 0.0) {
      run += v[i];
      c.lev.push_back(run);
      c.bin.push_back(static_cast<long>(i));
    }
  if (c.lev.empty()) fail(errc::zero_total, "histogram carries no mass");
  return c;
}

// Shared state for evaluating the cut cost C(alpha): the line transport cost
// between the two quantile functions with the target's mass levels shifted by
// alpha. The target quantile is extended one full turn in each direction
// (level +- 1 maps to position +- N), which covers every cut in [-1, 1].
struct CutProblem {
  long n = 0;
  CompactCdf s, t;
  std::vector<double> fcache;  // f(d) for integer displacements d = 0..2n

  CutProblem(std::span<const double> sv, std::span<const double> tv,
             const GroundMetricSpec& spec) {
    n = static_cast<long>(sv.size());
    s = compact_cdf(sv);
    t = compact_cdf(tv);
    fcache.resize(static_cast<std::size_t>(2 * n + 1));
    for (long d = 0; d <= 2 * n; ++d)
      fcache[static_cast<std::size_t>(d)] = apply_metric(spec, static_cast<double>(d));
  }

  std::size_t ext_size() const { return 3 * t.lev.size(); }
  double ext_lev(std::size_t e) const {
    std::size_t k = t.lev.size();
    return t.lev[e % k] + static_cast<double>(static_cast<long>(e / k) - 1);
  }
  long ext_bin(std::size_t e) const {
    std::size_t k = t.lev.size();
    return t.bin[e % k] + (static_cast<long>(e / k) - 1) * n;
  }

  // first extended index whose level is strictly above x (may be ext_size())
  std::size_t ext_upper(double x) const {
    std::size_t lo = 0, hi = ext_size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (ext_lev(mid) > x)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

  // first extended index whose level is >= x
  std::size_t ext_lower(double x) const {
    std::size_t lo = 0, hi = ext_size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (ext_lev(mid) >= x)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

  long ext_bin_clamped(std::size_t e) const {
    return e < ext_size() ? ext_bin(e) : t.bin.back() + n;
  }

  double cost(double alpha) const {
    const std::size_t se = s.lev.size();
    const std::size_t te = ext_size();
    std::size_t si = 0;
    std::size_t e = ext_upper(alpha);
    long scur = s.bin[0];
    double snext = s.lev[0];
    long tcur = ext_bin_clamped(e);
    double tnext = e < te ? ext_lev(e) - alpha : kInf;
    double m = 0.0, acc = 0.0;
    long guard = 2 * static_cast<long>(se + te) + 16;
    while (m < 1.0) {
      double end = std::min(std::min(snext, tnext), 1.0);
      acc += (end - m) * fcache[static_cast<std::size_t>(std::labs(scur - tcur))];
      m = end;
      if (m >= 1.0) break;
      while (si < se && s.lev[si] <= m) ++si;
      if (si < se) {
        scur = s.bin[si];
        snext = s.lev[si];
      } else {
        scur = s.bin.back();  // levels above the last source prefix stay in the last bin
        snext = kInf;
      }
      while (e < te && ext_lev(e) - alpha <= m) ++e;
      tcur = ext_bin_clamped(e);
      tnext = e < te ? ext_lev(e) - alpha : kInf;
      if (--guard < 0) fail(errc::numerical_failure, "cut merge stalled");
    }
    return acc;
  }
};

struct CutSearch {
  double value = 0.0;
  double alpha = 0.0;
};

// Ternary search over the grid {k/m : k in [-m, m]} (the cut cost is convex in
// alpha), then an exact scan of the breakpoint-collision offsets within one
// grid cell of the best grid point. C is piecewise linear with kinks only
// where a shifted target breakpoint crosses a source breakpoint or a domain
// end, so this pins the continuous minimum exactly.
CutSearch cut_search(const CutProblem& cp, std::uint64_t grid) {
  const long long m = static_cast<long long>(grid);
  auto eval = [&](long long k) { return cp.cost(static_cast<double>(k) / static_cast<double>(m)); };
  long long lo = -m, hi = m;
  while (hi - lo > 8) {
    long long m1 = lo + (hi - lo) / 3;
    long long m2 = hi - (hi - lo) / 3;
    if (eval(m1) <= eval(m2))
      hi = m2;
    else
      lo = m1;
  }
  CutSearch best{kInf, 0.0};
  for (long long k = lo; k <= hi; ++k) {
    double c = eval(k);
    if (c < best.value) best = {c, static_cast<double>(k) / static_cast<double>(m)};
  }
  const double wlo = std::max(-1.0, best.alpha - 1.0 / static_cast<double>(m));
  const double whi = std::min(1.0, best.alpha + 1.0 / static_cast<double>(m));
  auto try_alpha = [&](double a) {
    if (a < wlo || a > whi) return;
    double c = cp.cost(a);
    if (c < best.value) best = {c, a};
  };
  auto scan_level = [&](double level) {
    // collisions: alpha such that an extended target break lands on `level`
    for (std::size_t e = cp.ext_lower(level + wlo);
         e < cp.ext_size() && cp.ext_lev(e) <= level + whi; ++e)
      try_alpha(cp.ext_lev(e) - level);
  };
  for (double level : cp.s.lev)
    if (level < 1.0) scan_level(level);
  scan_level(0.0);
  scan_level(1.0);
  return best;
}

// Derivative of the cut cost with respect to raising the source prefix
// breakpoint at each bin, alpha fixed. Raising prefix i extends bin i's mass
// interval into bin i+1's territory at level prefix[i]; breaks at or above the
// domain end do not matter.
std::vector<double> cut_breakpoint_slopes(std::span<const double> sv, const CutProblem& cp,
                                          double alpha) {
  const std::size_t n = sv.size();
  std::vector<double> gamma(n - 1, 0.0);
  double run = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    run += sv[i];
    if (run >= 1.0) continue;
    std::size_t e = cp.ext_upper(run + alpha);
    long j = cp.ext_bin_clamped(e);
    long li = static_cast<long>(i);
    gamma[i] = cp.fcache[static_cast<std::size_t>(std::labs(li - j))] -
               cp.fcache[static_cast<std::size_t>(std::labs(li + 1 - j))];
  }
  return gamma;
}

std::vector<double> phi_values(std::span<const double> s, std::span<const double> t) {
  std::vector<double> phi(s.size());
  double run = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    run += s[j] - t[j];
    phi[j] = run;
  }
  return phi;
}

double lower_median(std::vector<double> v) {
  std::size_t k = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
  return v[k];
}

}  // namespace

LossValue one_hot_loss(const Histogram& s, std::size_t j_star, const GroundMetricSpec& spec) {
  return {detail::one_hot_raw(s.values(), j_star, spec), "one_hot", std::nullopt};
}

std::vector<double> one_hot_grad(const Histogram& s, std::size_t j_star,
                                 const GroundMetricSpec& spec) {
  const std::size_t n = s.size();
  if (j_star >= n) fail(errc::index_out_of_range, "target bin " + std::to_string(j_star));
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = apply_metric(spec, static_cast<double>(arc_length(i, j_star, n)));
  return g;
}

LossValue one_hot_loss(const Histogram& s, std::size_t j_star, const Matrix& cost) {
  const std::size_t n = s.size();
  if (cost.rows != n || cost.cols != n) fail(errc::dimension_mismatch, "cost matrix shape");
  if (j_star >= n) fail(errc::index_out_of_range, "target bin " + std::to_string(j_star));
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += s[i] * cost.at(i, j_star);
  return {acc, "one_hot", std::nullopt};
}

std::vector<double> one_hot_grad(const Histogram& s, std::size_t j_star, const Matrix& cost) {
  const std::size_t n = s.size();
  if (cost.rows != n || cost.cols != n) fail(errc::dimension_mismatch, "cost matrix shape");
  if (j_star >= n) fail(errc::index_out_of_range, "target bin " + std::to_string(j_star));
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = cost.at(i, j_star);
  return g;
}

LossValue linear_circular(const Histogram& s, const Histogram& t) {
  check_pair(s, t);
  check_normalized(s, "source");
  check_normalized(t, "target");
  double alpha = 0.0;
  double v = detail::linear_circular_raw(s.values(), t.values(), &alpha);
  return {v, "linear_circular", alpha};
}

std::vector<double> linear_circular_grad(const Histogram& s, const Histogram& t) {
  check_pair(s, t);
  check_normalized(s, "source");
  check_normalized(t, "target");
  std::vector<double> phi = phi_values(s.values(), t.values());
  double alpha = lower_median(phi);
  const std::size_t n = phi.size();
  std::vector<double> g(n, 0.0);
  double suffix = 0.0;
  for (std::size_t r = n; r-- > 0;) {
    double d = phi[r] - alpha;
    suffix += d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    g[r] = suffix;
  }
  return g;
}

LossValue convex_circular(const Histogram& s, const Histogram& t, const GroundMetricSpec& spec,
                          QuantilePrecision prec) {
  check_pair(s, t);
  check_normalized(s, "source");
  check_normalized(t, "target");
  if (!spec.convex()) fail(errc::non_convex_spec, spec.name() + " is not convex in distance");
  if (prec.m < s.size()) fail(errc::bad_parameter, "precision below the bin count");
  CutProblem cp(s.values(), t.values(), spec);
  CutSearch r = cut_search(cp, prec.m);
  return {r.value, "convex_circular", r.alpha};
}

std::vector<double> convex_circular_grad(const Histogram& s, const Histogram& t,
                                         const GroundMetricSpec& spec, QuantilePrecision prec) {
  check_pair(s, t);
  check_normalized(s, "source");
  check_normalized(t, "target");
  if (!spec.convex()) fail(errc::non_convex_spec, spec.name() + " is not convex in distance");
  if (prec.m < s.size()) fail(errc::bad_parameter, "precision below the bin count");
  CutProblem cp(s.values(), t.values(), spec);
  CutSearch r = cut_search(cp, prec.m);
  std::vector<double> gamma = cut_breakpoint_slopes(s.values(), cp, r.alpha);
  const std::size_t n = s.size();
  std::vector<double> g(n, 0.0);
  double suffix = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    suffix += gamma[i];
    g[i] = suffix;
  }
  return g;
}

LossValue convex_circular_with_grad(const Histogram& s, const Histogram& t,
                                    const GroundMetricSpec& spec, std::vector<double>& grad,
                                    QuantilePrecision prec) {
  check_pair(s, t);
  check_normalized(s, "source");
  check_normalized(t, "target");
  if (!spec.convex()) fail(errc::non_convex_spec, spec.name() + " is not convex in distance");
  if (prec.m < s.size()) fail(errc::bad_parameter, "precision below the bin count");
  CutProblem cp(s.values(), t.values(), spec);
  CutSearch r = cut_search(cp, prec.m);
  std::vector<double> gamma = cut_breakpoint_slopes(s.values(), cp, r.alpha);
  const std::size_t n = s.size();
  grad.assign(n, 0.0);
  double suffix = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    suffix += gamma[i];
    grad[i] = suffix;
  }
  return {r.value, "convex_circular", r.alpha};
}

LossValue line_wasserstein(const Histogram& s, const Histogram& t, const GroundMetricSpec& spec) {
  check_pair(s, t);
  check_normalized(s, "source");
  check_normalized(t, "target");
  CutProblem cp(s.values(), t.values(), spec);
  return {cp.cost(0.0), "line_wasserstein", std::nullopt};
}

LossValue step_l1(const Histogram& s, const Histogram& t) {
  check_pair(s, t);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += std::abs(s[i] - t[i]);
  return {0.5 * acc, "step_l1", std::nullopt};
}

LossValue dispatch_loss(const Histogram& s, const Histogram& t, const GroundMetricSpec& spec,
                        QuantilePrecision prec) {
  check_pair(s, t);
  if (auto j = t.one_hot_index()) return one_hot_loss(s, *j, spec);
  switch (spec.kind) {
    case MetricKind::linear:
      return linear_circular(s, t);
    case MetricKind::step:
      return step_l1(s, t);
    case MetricKind::power:
    case MetricKind::huber:
      if (spec.convex()) return convex_circular(s, t, spec, prec);
      break;
    case MetricKind::chord:
      break;
  }
  LpSolution lp = lp_exact(s, t, ground_matrix(spec, s.size()));
  return lp.loss;
}

LossValue dispatch_loss(const Histogram& s, std::size_t j_star, const GroundMetricSpec& spec) {
  return one_hot_loss(s, j_star, spec);
}

namespace detail {

double one_hot_raw(std::span<const double> s, std::size_t j_star, const GroundMetricSpec& spec) {
  const std::size_t n = s.size();
  if (n == 0) fail(errc::empty_input, "empty histogram");
  if (j_star >= n) fail(errc::index_out_of_range, "target bin " + std::to_string(j_star));
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += s[i] * apply_metric(spec, static_cast<double>(arc_length(i, j_star, n)));
  return acc;
}

double linear_circular_raw(std::span<const double> s, std::span<const double> t,
                           double* alpha_out) {
  if (s.size() != t.size() || s.empty()) fail(errc::length_mismatch, "histogram sizes differ");
  std::vector<double> phi = phi_values(s, t);
  double alpha = lower_median(phi);
  double acc = 0.0;
  for (double p : phi) acc += std::abs(p - alpha);
  if (alpha_out) *alpha_out = alpha;
  return acc;
}

double cut_cost_raw(std::span<const double> s, std::span<const double> t,
                    const GroundMetricSpec& spec, double alpha) {
  if (s.size() != t.size() || s.empty()) fail(errc::length_mismatch, "histogram sizes differ");
  if (alpha < -1.0 || alpha > 1.0) fail(errc::out_of_range, "cut offset outside [-1, 1]");
  CutProblem cp(s, t, spec);
  return cp.cost(alpha);
}

double convex_circular_raw(std::span<const double> s, std::span<const double> t,
                           const GroundMetricSpec& spec, std::uint64_t grid, double* alpha_out) {
  CutProblem cp(s, t, spec);
  CutSearch r = cut_search(cp, grid);
  if (alpha_out) *alpha_out = r.alpha;
  return r.value;
}

}  // namespace detail

}  // namespace circot
