#include <cmath>
#include <limits>

#include "wbounds/transport.hpp"

namespace wbounds {

namespace {

std::vector<Index> split_units(const VectorXd& mass, Index denom) {
  std::vector<Index> units;
  for (Index i = 0; i < mass.size(); ++i) {
    const double scaled = mass[i] * static_cast<double>(denom);
    const double q = std::round(scaled);
    if (std::abs(scaled - q) > 1e-9)
      throw Error(ErrorCode::QuantizationResidual,
                  "mass " + std::to_string(mass[i]) + " is not a multiple of 1/" +
                      std::to_string(denom));
    for (Index k = 0; k < static_cast<Index>(q); ++k) units.push_back(i);
  }
  return units;
}

// Shortest augmenting path Hungarian method with row/column potentials on a
// square cost matrix, O(k^3).
double assignment_cost(const MatrixXd& a) {
  const Index k = a.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<Index> match(k + 1, 0), way(k + 1, 0);
  for (Index i = 1; i <= k; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= k; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (Index j = 1; j <= k; ++j) total += a(match[j] - 1, j - 1);
  return total;
}

}  // namespace

double hungarian_oracle(const TransportProblem& problem, Index denom) {
  if (denom < 1) throw Error(ErrorCode::InvalidArgument, "denominator must be >= 1");
  const std::vector<Index> rows = split_units(problem.supply, denom);
  const std::vector<Index> cols = split_units(problem.demand, denom);
  if (rows.size() != cols.size())
    throw Error(ErrorCode::Unbalanced, "unit counts differ after splitting");
  const auto k = static_cast<Index>(rows.size());
  if (k == 0) return 0.0;
  MatrixXd a(k, k);
  for (Index r = 0; r < k; ++r)
    for (Index c = 0; c < k; ++c) a(r, c) = problem.cost(rows[r], cols[c]);
  return assignment_cost(a) / static_cast<double>(denom);
}

double wasserstein_1d(const GridMeasure& mu, const GridMeasure& nu, double p) {
  if (mu.grid.dim() != 1 || nu.grid.dim() != 1)
    throw Error(ErrorCode::DimensionMismatch, "wasserstein_1d needs one-dimensional grids");
  const Index n = mu.mass.size(), m = nu.mass.size();
  Index i = 0, j = 0;
  double ri = n > 0 ? mu.mass[0] : 0.0;
  double rj = m > 0 ? nu.mass[0] : 0.0;
  double cost = 0.0;
  while (i < n && j < m) {
    const double x = std::min(ri, rj);
    if (x > 0.0) cost += x * std::pow(std::abs(static_cast<double>(i - j)), p);
    ri -= x;
    rj -= x;
    if (ri <= rj) {
      if (++i < n) ri = mu.mass[i];
    } else {
      if (++j < m) rj = nu.mass[j];
    }
  }
  return std::pow(cost, 1.0 / p);
}

}  // namespace wbounds
