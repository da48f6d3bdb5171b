#include "circot/transport_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace circot {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResidualRel = 1e-15;  // mass below this (times scale) is summation dust
}  // namespace

LpSolution lp_exact(const Histogram& s, const Histogram& t, const Matrix& cost) {
  const std::size_t n = s.size();
  const std::size_t m = t.size();
  if (cost.rows != n || cost.cols != m)
    fail(errc::dimension_mismatch, "cost is " + std::to_string(cost.rows) + "x" +
                                       std::to_string(cost.cols) + ", need " + std::to_string(n) +
                                       "x" + std::to_string(m));
  for (double c : cost.data)
    if (!(c >= 0.0)) fail(errc::bad_parameter, "costs must be nonnegative and finite");

  std::vector<double> rs(s.values().begin(), s.values().end());
  std::vector<double> rt(t.values().begin(), t.values().end());
  const double need =
      std::min(std::accumulate(rs.begin(), rs.end(), 0.0), std::accumulate(rt.begin(), rt.end(), 0.0));
  if (need <= 0.0) fail(errc::infeasible_marginals, "no transportable mass");
  const double dust = kResidualRel * std::max(1.0, need);

  Matrix flows(n, m);
  std::vector<double> u(n, 0.0), v(m, 0.0);  // duals: u_i + v_j <= cost(i,j)
  const std::size_t nodes = n + m;           // 0..n-1 sources, n..n+m-1 sinks
  std::vector<double> dist(nodes);
  std::vector<long> parent(nodes);
  std::vector<char> settled(nodes);

  double delivered = 0.0;
  // Each augmentation exhausts a supply, a demand, or a flow cell; this bound
  // is far above anything a well-posed instance produces.
  std::size_t augmentations = 0;
  const std::size_t max_augmentations = 64 + 16 * nodes;

  // Terminate off the residual vectors themselves: a separate need-minus-
  // delivered counter drifts away from them after many augmentations.
  while (true) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1L);
    std::fill(settled.begin(), settled.end(), char{0});
    bool any_root = false;
    for (std::size_t i = 0; i < n; ++i)
      if (rs[i] > dust) {
        dist[i] = 0.0;
        any_root = true;
      }
    if (!any_root) break;  // supplies are exhausted up to dust

    long sink = -1;
    while (true) {
      std::size_t best = nodes;
      double bd = kInf;
      for (std::size_t a = 0; a < nodes; ++a)
        if (!settled[a] && dist[a] < bd) {
          bd = dist[a];
          best = a;
        }
      if (best == nodes) break;
      settled[best] = 1;
      if (best >= n) {
        std::size_t j = best - n;
        if (rt[j] > dust) {
          sink = static_cast<long>(j);
          break;
        }
        // relax backward arcs along existing flow; reduced cost is zero up to
        // rounding under complementary slackness
        for (std::size_t i = 0; i < n; ++i) {
          if (flows.at(i, j) <= 0.0) continue;
          double rc = u[i] + v[j] - cost.at(i, j);
          if (rc < 0.0) rc = 0.0;
          double nd = dist[best] + rc;
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = static_cast<long>(best);
          }
        }
      } else {
        std::size_t i = best;
        for (std::size_t j = 0; j < m; ++j) {
          double rc = cost.at(i, j) - u[i] - v[j];
          if (rc < 0.0) rc = 0.0;
          double nd = dist[i] + rc;
          if (nd < dist[n + j]) {
            dist[n + j] = nd;
            parent[n + j] = static_cast<long>(i);
          }
        }
      }
    }
    if (sink < 0) break;  // every bin of remaining demand is dust

    const double delta = dist[n + static_cast<std::size_t>(sink)];
    for (std::size_t i = 0; i < n; ++i) u[i] -= std::min(dist[i], delta);
    for (std::size_t j = 0; j < m; ++j) v[j] += std::min(dist[n + j], delta);

    // trace the path and find the bottleneck
    double bottleneck = rt[static_cast<std::size_t>(sink)];
    std::size_t node = n + static_cast<std::size_t>(sink);
    while (parent[node] >= 0) {
      std::size_t prev = static_cast<std::size_t>(parent[node]);
      if (node < n) bottleneck = std::min(bottleneck, flows.at(node, prev - n));
      node = prev;
    }
    bottleneck = std::min(bottleneck, rs[node]);
    if (!(bottleneck > 0.0)) fail(errc::numerical_failure, "augmentation stalled");

    node = n + static_cast<std::size_t>(sink);
    while (parent[node] >= 0) {
      std::size_t prev = static_cast<std::size_t>(parent[node]);
      if (node >= n) {
        flows.at(prev, node - n) += bottleneck;
      } else {
        double& f = flows.at(node, prev - n);
        f -= bottleneck;
        if (f < 0.0) f = 0.0;
      }
      node = prev;
    }
    rs[node] -= bottleneck;
    rt[static_cast<std::size_t>(sink)] -= bottleneck;
    delivered += bottleneck;
    if (++augmentations > max_augmentations)
      fail(errc::numerical_failure, "augmentation count exceeded sane bounds");
  }
  if (std::fabs(need - delivered) > 1e-9 * std::max(1.0, need))
    fail(errc::numerical_failure, "transport terminated with unshipped mass");

  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) value += flows.at(i, j) * cost.at(i, j);

  LpSolution sol;
  sol.loss = {value, "lp_exact", std::nullopt};
  sol.plan = {std::move(flows)};
  sol.source_potential = std::move(u);
  sol.sink_potential = std::move(v);
  return sol;
}

}  // namespace circot
