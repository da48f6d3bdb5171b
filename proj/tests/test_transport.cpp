#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "circot/ground_metric.hpp"
#include "circot/rng.hpp"
#include "circot/sinkhorn.hpp"
#include "circot/transport_lp.hpp"
#include "doctest.h"

using namespace circot;

namespace {

// Exhaustive minimum over the vertices of the transportation polytope: every
// basic solution is supported on a spanning tree of the bipartite graph, so
// enumerating edge subsets of size n + m - 1 and solving each tree by leaf
// elimination visits every vertex.
double brute_force_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                             const Matrix& cost) {
  const std::size_t n = supply.size(), m = demand.size();
  const std::size_t edges = n * m, nodes = n + m;
  const std::size_t pick = nodes - 1;
  double best = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> idx(pick);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    // solve the candidate tree by repeatedly forcing the flow at a leaf
    std::vector<double> balance(nodes);
    for (std::size_t i = 0; i < n; ++i) balance[i] = supply[i];
    for (std::size_t j = 0; j < m; ++j) balance[n + j] = -demand[j];
    std::vector<std::size_t> degree(nodes, 0);
    std::vector<bool> alive(pick, true);
    for (std::size_t e : idx) {
      ++degree[e / m];
      ++degree[n + e % m];
    }

    double total = 0.0;
    bool feasible = true;
    for (std::size_t step = 0; step < pick && feasible; ++step) {
      std::size_t leaf_edge = pick;
      std::size_t leaf_node = 0;
      for (std::size_t k = 0; k < pick && leaf_edge == pick; ++k) {
        if (!alive[k]) continue;
        const std::size_t u = idx[k] / m, v = n + idx[k] % m;
        if (degree[u] == 1) {
          leaf_edge = k;
          leaf_node = u;
        } else if (degree[v] == 1) {
          leaf_edge = k;
          leaf_node = v;
        }
      }
      if (leaf_edge == pick) {  // a cycle: not a tree, skip this subset
        feasible = false;
        break;
      }
      const std::size_t u = idx[leaf_edge] / m, v = n + idx[leaf_edge] % m;
      const std::size_t other = leaf_node == u ? v : u;
      const double flow = leaf_node < n ? balance[leaf_node] : -balance[leaf_node];
      if (flow < -1e-12) {
        feasible = false;
        break;
      }
      total += flow * cost.at(idx[leaf_edge] / m, idx[leaf_edge] % m);
      balance[other] += balance[leaf_node];
      balance[leaf_node] = 0.0;
      alive[leaf_edge] = false;
      --degree[u];
      --degree[v];
    }
    if (feasible) best = std::min(best, total);

    // next combination
    std::size_t k = pick;
    while (k > 0) {
      --k;
      if (idx[k] != edges - pick + k) {
        ++idx[k];
        for (std::size_t j = k + 1; j < pick; ++j) idx[j] = idx[j - 1] + 1;
        break;
      }
      if (k == 0) return best;
    }
  }
}

Histogram random_hist(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = -std::log(rng.uniform_pos());
  return Histogram::make(std::move(v), true);
}

Matrix random_cost(std::size_t n, std::size_t m, Rng& rng) {
  Matrix c(n, m);
  for (double& v : c.data) v = 5.0 * rng.uniform();
  return c;
}

// random maximal greedy shipment: feasible because a pair with leftover supply
// and demand would have absorbed mass when it was visited
Matrix random_feasible_plan(const Histogram& s, const Histogram& t, Rng& rng) {
  const std::size_t n = s.size(), m = t.size();
  std::vector<double> supply(s.values().begin(), s.values().end());
  std::vector<double> demand(t.values().begin(), t.values().end());
  std::vector<std::size_t> order(n * m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int(i + 1)]);
  Matrix plan(n, m);
  for (std::size_t e : order) {
    const std::size_t i = e / m, j = e % m;
    const double f = std::min(supply[i], demand[j]);
    plan.at(i, j) = f;
    supply[i] -= f;
    demand[j] -= f;
  }
  return plan;
}

double plan_cost(const Matrix& plan, const Matrix& cost) {
  double acc = 0.0;
  for (std::size_t i = 0; i < plan.rows; ++i)
    for (std::size_t j = 0; j < plan.cols; ++j) acc += plan.at(i, j) * cost.at(i, j);
  return acc;
}

}  // namespace

TEST_CASE("exact solver matches exhaustive vertex enumeration on small instances") {
  Rng rng(11);
  for (std::size_t n : {3u, 4u}) {
    for (int rep = 0; rep < 40; ++rep) {
      Histogram s = random_hist(n, rng);
      Histogram t = random_hist(n, rng);
      // alternate between circular metric costs and arbitrary random costs
      Matrix cost = rep % 2 == 0 ? ground_matrix(GroundMetricSpec::power(2.0), n)
                                 : random_cost(n, n, rng);
      LpSolution sol = lp_exact(s, t, cost);
      std::vector<double> sup(s.values().begin(), s.values().end());
      std::vector<double> dem(t.values().begin(), t.values().end());
      const double brute = brute_force_transport(sup, dem, cost);
      CHECK(sol.loss.value == doctest::Approx(brute).epsilon(1e-9));
    }
  }
}

TEST_CASE("half the mass across the circle costs exactly one step each") {
  Histogram s = Histogram::make({0.5, 0.5, 0.0, 0.0}, false);
  Histogram t = Histogram::make({0.0, 0.0, 0.5, 0.5}, false);
  LpSolution sol = lp_exact(s, t, ground_matrix(GroundMetricSpec::linear(), 4));
  CHECK(sol.loss.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.loss.solver_tag == "lp_exact");
}

TEST_CASE("identical histograms transport for free") {
  Rng rng(3);
  Histogram s = random_hist(8, rng);
  LpSolution sol = lp_exact(s, s, ground_matrix(GroundMetricSpec::huber(2.0), 8));
  CHECK(sol.loss.value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("optimal plans have exact marginals and consistent cost") {
  Rng rng(29);
  for (int rep = 0; rep < 25; ++rep) {
    Histogram s = random_hist(5, rng);
    Histogram t = random_hist(5, rng);
    Matrix cost = ground_matrix(GroundMetricSpec::linear(), 5);
    LpSolution sol = lp_exact(s, t, cost);
    for (std::size_t i = 0; i < 5; ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(sol.plan.flows.at(i, j) >= 0.0);
        row += sol.plan.flows.at(i, j);
        col += sol.plan.flows.at(j, i);
      }
      CHECK(row == doctest::Approx(s[i]).epsilon(1e-9));
      CHECK(col == doctest::Approx(t[i]).epsilon(1e-9));
    }
    CHECK(plan_cost(sol.plan.flows, cost) == doctest::Approx(sol.loss.value).epsilon(1e-9));
  }
}

TEST_CASE("no feasible plan undercuts the reported optimum") {
  Rng rng(41);
  Histogram s = random_hist(6, rng);
  Histogram t = random_hist(6, rng);
  Matrix cost = random_cost(6, 6, rng);
  LpSolution sol = lp_exact(s, t, cost);
  for (int rep = 0; rep < 100; ++rep) {
    Matrix plan = random_feasible_plan(s, t, rng);
    CHECK(plan_cost(plan, cost) >= sol.loss.value - 1e-9);
  }
}

TEST_CASE("duals are feasible and complementary at the optimum") {
  Rng rng(53);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 4 + rep % 3;
    Histogram s = random_hist(n, rng);
    Histogram t = random_hist(n, rng);
    Matrix cost = rep % 2 == 0 ? ground_matrix(GroundMetricSpec::power(1.5), n)
                               : random_cost(n, n, rng);
    LpSolution sol = lp_exact(s, t, cost);
    double dual_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) dual_value += sol.source_potential[i] * s[i];
    for (std::size_t j = 0; j < n; ++j) dual_value += sol.sink_potential[j] * t[j];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double slack = cost.at(i, j) - sol.source_potential[i] - sol.sink_potential[j];
        CHECK(slack >= -1e-9);
        if (sol.plan.flows.at(i, j) > 1e-12) CHECK(std::abs(slack) <= 1e-9);
      }
    CHECK(dual_value == doctest::Approx(sol.loss.value).epsilon(1e-9));
  }
}

TEST_CASE("unbalanced problems ship only the smaller total") {
  Histogram s = Histogram::unnormalized({0.4, 0.3});
  Histogram t = Histogram::unnormalized({0.5, 0.5});
  LpSolution sol = lp_exact(s, t, line_matrix(GroundMetricSpec::linear(), 2));
  double shipped = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      shipped += sol.plan.flows.at(i, j);
      CHECK(sol.plan.flows.at(i, j) >= 0.0);
    }
  CHECK(shipped == doctest::Approx(0.7).epsilon(1e-9));
  double row0 = sol.plan.flows.at(0, 0) + sol.plan.flows.at(0, 1);
  CHECK(row0 <= 0.4 + 1e-12);
}

TEST_CASE("solver rejects mismatched shapes") {
  Histogram s = Histogram::uniform(3);
  Histogram t = Histogram::uniform(4);
  CHECK_THROWS_AS(lp_exact(s, t, Matrix(3, 3, 1.0)), Error);
  CHECK_THROWS_AS(lp_exact(s, s, Matrix(4, 4, 1.0)), Error);
}

TEST_CASE("entropic approximation never undercuts the exact optimum") {
  Rng rng(67);
  for (std::size_t n : {4u, 8u, 16u}) {
    for (int rep = 0; rep < 10; ++rep) {
      Histogram s = random_hist(n, rng);
      Histogram t = random_hist(n, rng);
      Matrix cost = ground_matrix(GroundMetricSpec::linear(), n);
      LpSolution lp = lp_exact(s, t, cost);
      SinkhornResult sk = sinkhorn_approx(s, t, cost);
      CHECK(sk.loss.value >= lp.loss.value - 1e-9);
      CHECK(sk.loss.solver_tag == "sinkhorn");
      CHECK(sk.final_violation <= 1e-9);
    }
  }
}

TEST_CASE("entropic cost approaches the optimum as regularization shrinks") {
  Histogram s = Histogram::make({0.5, 0.5, 0.0, 0.0}, false);
  Histogram t = Histogram::make({0.0, 0.0, 0.5, 0.5}, false);
  Matrix cost = ground_matrix(GroundMetricSpec::linear(), 4);
  double prev = std::numeric_limits<double>::infinity();
  for (double reg : {1.0, 0.1, 0.01}) {
    SinkhornOptions opt;
    opt.reg = reg;
    SinkhornResult sk = sinkhorn_approx(s, t, cost, opt);
    CHECK(sk.loss.value <= prev + 1e-9);
    prev = sk.loss.value;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(0.05));  // within 5% at reg = 0.01
}

TEST_CASE("matching histograms cost little even with regularization") {
  Histogram u = Histogram::uniform(8);
  SinkhornResult sk = sinkhorn_approx(u, u, ground_matrix(GroundMetricSpec::linear(), 8));
  CHECK(sk.loss.value < 0.05);
  CHECK(sk.iterations > 0);
}

TEST_CASE("iteration starvation raises the convergence error") {
  Rng rng(71);
  Histogram s = random_hist(8, rng);
  Histogram t = random_hist(8, rng);
  SinkhornOptions opt;
  opt.max_iters = 1;
  opt.tol = 1e-14;
  CHECK_THROWS_AS(sinkhorn_approx(s, t, ground_matrix(GroundMetricSpec::linear(), 8), opt),
                  Error);
  try {
    sinkhorn_approx(s, t, ground_matrix(GroundMetricSpec::linear(), 8), opt);
  } catch (const Error& e) {
    CHECK(e.code() == errc::not_converged);
  }
}

TEST_CASE("violation tracking records one entry per iteration and ends below tol") {
  Rng rng(73);
  Histogram s = random_hist(6, rng);
  Histogram t = random_hist(6, rng);
  SinkhornOptions opt;
  opt.track_violations = true;
  SinkhornResult sk = sinkhorn_approx(s, t, ground_matrix(GroundMetricSpec::linear(), 6), opt);
  CHECK(sk.violations.size() == sk.iterations);
  REQUIRE(!sk.violations.empty());
  CHECK(sk.violations.back() <= opt.tol);
  CHECK(sk.violations.back() <= sk.violations.front() + 1e-12);
}
