#ifndef WBOUNDS_COSTS_HPP
#define WBOUNDS_COSTS_HPP

#include <Eigen/Core>

#include <cmath>

#include "wbounds/measures.hpp"

namespace wbounds {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ArrayXXb = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Metric { L2 };

// rho^p from a squared Euclidean distance, with the common exponents
// special-cased so p = 1, 2 avoid pow().
inline double power_of_distance(double squared, double p) {
  if (p == 2.0) return squared;
  if (p == 1.0) return std::sqrt(squared);
  return std::pow(squared, 0.5 * p);
}

template <typename DerivedX, typename DerivedY>
double pair_cost(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                 double p) {
  return power_of_distance((x - y).squaredNorm(), p);
}

// Lazy ground cost C_ij = rho(x_i, y_j)^p over two point sets (columns).
class CostSpec {
 public:
  CostSpec(MatrixXd source, MatrixXd target, double p, Metric metric = Metric::L2);
  CostSpec(const GridSpec& grid, double p);

  double operator()(Index i, Index j) const {
    double sq = 0.0;
    for (Index k = 0; k < source_.rows(); ++k) {
      const double t = source_(k, i) - target_(k, j);
      sq += t * t;
    }
    return power_of_distance(sq, p_);
  }

  Index rows() const { return source_.cols(); }
  Index cols() const { return target_.cols(); }
  double p() const { return p_; }
  Metric metric() const { return metric_; }
  const MatrixXd& source() const { return source_; }
  const MatrixXd& target() const { return target_; }

  // Dense n x m materialization; only for sizes where that is affordable.
  RowMatrixXd materialize() const;

 private:
  MatrixXd source_;
  MatrixXd target_;
  double p_;
  Metric metric_;
};

inline double ground_cost(const CostSpec& spec, Index i, Index j) { return spec(i, j); }

enum class CoarseCostKind { Center, Weighted, Min };

struct CoarseCostMatrix {
  CoarseCostKind kind;
  RowMatrixXd values;
  // False where an empty source or target block makes the entry irrelevant
  // to the coarse problem (weighted kind only).
  ArrayXXb used;
  Index kappa = 0;
};

/// c~_kl = rho(x~_k, y~_l)^p between block centers.
CoarseCostMatrix center_cost_matrix(const MatrixXd& coarse_src, const MatrixXd& coarse_dst,
                                    double p);
CoarseCostMatrix center_cost_matrix(const CoarseningSpec& c, double p);

/// Block-pair cost averaged under the product coupling mu (x) nu. Entries
/// whose source or target block is empty fall back to the center cost and
/// are flagged unused. Requires normalized measures.
CoarseCostMatrix weighted_cost_matrix(const GridMeasure& mu, const GridMeasure& nu,
                                      const CoarseningSpec& c, double p);

/// min over x in X_k, y in Y_l of rho(x, y)^p, via per-axis interval gaps.
CoarseCostMatrix min_cost_matrix(const CoarseningSpec& c, double p);

}  // namespace wbounds

#endif  // WBOUNDS_COSTS_HPP
