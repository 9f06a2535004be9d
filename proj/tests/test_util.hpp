#ifndef WBOUNDS_TEST_UTIL_HPP
#define WBOUNDS_TEST_UTIL_HPP

#include <random>
#include <vector>

#include "wbounds/bounds.hpp"

namespace wbounds::testing {

inline GridSpec cube(Index n, Index d) {
  return GridSpec(std::vector<Index>(static_cast<std::size_t>(d), n));
}

// Random normalized measure; with `sparsity` > 0 that fraction of cells is
// zeroed (at least one cell stays positive).
inline GridMeasure random_measure(const GridSpec& g, std::mt19937_64& rng, double sparsity = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd m(g.size());
  for (Index i = 0; i < g.size(); ++i) m[i] = u(rng) < sparsity ? 0.0 : 0.05 + u(rng);
  if (m.sum() == 0.0) m[static_cast<Index>(rng() % static_cast<std::uint64_t>(g.size()))] = 1.0;
  return normalize(GridMeasure(g, m));
}

// Masses in multiples of 1/denom.
inline GridMeasure quantized_measure(const GridSpec& g, Index denom, std::mt19937_64& rng) {
  VectorXd m = VectorXd::Zero(g.size());
  for (Index q = 0; q < denom; ++q) m[static_cast<Index>(rng() % static_cast<std::uint64_t>(g.size()))] += 1.0;
  return GridMeasure(g, m / static_cast<double>(denom));
}

inline GridMeasure dirac(const GridSpec& g, Index i) {
  VectorXd m = VectorXd::Zero(g.size());
  m[i] = 1.0;
  return GridMeasure(g, m);
}

// Exact W_p^p by the network simplex.
inline double exact_cost(const GridMeasure& mu, const GridMeasure& nu, double p) {
  return solve_exact(mu, nu, p).value;
}

}  // namespace wbounds::testing

#endif  // WBOUNDS_TEST_UTIL_HPP
