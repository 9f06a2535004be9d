#include <chrono>
#include <cmath>

#include "wbounds/bounds.hpp"

namespace wbounds {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void require_same_grid(const GridMeasure& mu, const GridMeasure& nu) {
  if (!(mu.grid == nu.grid)) throw Error(ErrorCode::GridMismatch, "measures on different grids");
}

BoundReport coarse_bound(const char* method, const GridMeasure& mu, const GridMeasure& nu,
                         const CoarseningSpec& c, const RowMatrixXd& coarse_cost, double p,
                         std::chrono::steady_clock::time_point t0) {
  const GridMeasure mu_c = coarsen_measure(mu, c);
  const GridMeasure nu_c = coarsen_measure(nu, c);
  const TransportSolution sol =
      solve_transport(make_transport_problem(mu_c.mass, nu_c.mass, coarse_cost));
  BoundReport r;
  r.method = method;
  r.transport_term = sol.value;
  r.value = r.raw_value = std::pow(std::max(0.0, sol.value), 1.0 / p);
  r.iterations = sol.pivots;
  r.coarse_size = c.coarse().size();
  r.wall_time = seconds_since(t0);
  return r;
}

}  // namespace

BoundReport exact_distance(const GridMeasure& mu, const GridMeasure& nu, double p) {
  const auto t0 = std::chrono::steady_clock::now();
  const TransportSolution sol = solve_exact(mu, nu, p);
  BoundReport r;
  r.method = "exact";
  r.transport_term = sol.value;
  r.value = r.raw_value = std::pow(std::max(0.0, sol.value), 1.0 / p);
  r.iterations = sol.pivots;
  r.coarse_size = mu.grid.size();
  r.wall_time = seconds_since(t0);
  return r;
}

BoundReport weighted_cost_upper_bound(const GridMeasure& mu, const GridMeasure& nu, Index kappa,
                                      double p) {
  const auto t0 = std::chrono::steady_clock::now();
  require_same_grid(mu, nu);
  const CoarseningSpec c(mu.grid, kappa);
  const CoarseCostMatrix cost = weighted_cost_matrix(mu, nu, c, p);
  return coarse_bound("weighted_cost", mu, nu, c, cost.values, p, t0);
}

BoundReport min_cost_lower_bound(const GridMeasure& mu, const GridMeasure& nu, Index kappa,
                                 double p) {
  const auto t0 = std::chrono::steady_clock::now();
  require_same_grid(mu, nu);
  const CoarseningSpec c(mu.grid, kappa);
  const CoarseCostMatrix cost = min_cost_matrix(c, p);
  return coarse_bound("min_cost", mu, nu, c, cost.values, p, t0);
}

}  // namespace wbounds
