#ifndef WBOUNDS_TRANSPORT_HPP
#define WBOUNDS_TRANSPORT_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

#include "wbounds/costs.hpp"
#include "wbounds/measures.hpp"

namespace wbounds {

// Balanced transportation problem over the positive entries of two
// measures. source_index / target_index map support rows and columns back
// to cells of the original grids.
struct TransportProblem {
  VectorXd supply;
  VectorXd demand;
  RowMatrixXd cost;
  std::vector<Index> source_index;
  std::vector<Index> target_index;
  Index source_cells = 0;
  Index target_cells = 0;
};

/// Drops zero-mass cells and gathers the cost rows/columns of the supports.
/// `full_cost` is any n x m Eigen expression or a CostSpec.
TransportProblem make_transport_problem(const VectorXd& mu, const VectorXd& nu,
                                        const RowMatrixXd& full_cost);
TransportProblem make_transport_problem(const VectorXd& mu, const VectorXd& nu,
                                        const CostSpec& cost);

using Triplet = Eigen::Triplet<double, Index>;

// Transport plan as (row, col, mass) triples over full grid indices.
struct SparseCoupling {
  Index rows = 0;
  Index cols = 0;
  std::vector<Triplet> triples;

  VectorXd row_marginal() const;
  VectorXd col_marginal() const;
  double total() const;
  Eigen::SparseMatrix<double, Eigen::RowMajor, Index> to_sparse() const;
};

// Kantorovich potentials on the supports (indexed like TransportProblem),
// normalized so that f[0] = 0.
struct DualPotentials {
  VectorXd f;
  VectorXd g;
  double feasibility_slack = 0.0;
};

struct TransportSolution {
  SparseCoupling coupling;
  DualPotentials potentials;
  double value = 0.0;
  double dual_value = 0.0;
  Index pivots = 0;
};

/// Exact network simplex on the complete bipartite graph of the problem.
/// Throws Unbalanced if the masses differ by more than 1e-12 and
/// IterationLimit after 50 (n + m)^2 pivots.
TransportSolution solve_transport(const TransportProblem& problem);

/// Convenience wrapper: exact L_C(mu, nu) with C = rho^p on a shared grid.
TransportSolution solve_exact(const GridMeasure& mu, const GridMeasure& nu, double p);

/// Assignment-splitting oracle: every support point with mass q / denom
/// becomes q unit points and the square assignment problem is solved by the
/// O(k^3) Hungarian method. Returns the optimal cost.
double hungarian_oracle(const TransportProblem& problem, Index denom);

/// Closed-form W_p (already rooted) of two 1D measures via the monotone
/// quantile coupling.
double wasserstein_1d(const GridMeasure& mu, const GridMeasure& nu, double p);

}  // namespace wbounds

#endif  // WBOUNDS_TRANSPORT_HPP
