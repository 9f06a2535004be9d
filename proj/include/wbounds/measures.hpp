#ifndef WBOUNDS_MEASURES_HPP
#define WBOUNDS_MEASURES_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "wbounds/error.hpp"

namespace wbounds {

using Index = Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Regular grid [N1] x ... x [Nd] with unit spacing. Coordinates are 1-based
// and cells are stored with axis 0 varying fastest:
//   index = sum_k u_k * (N_0 * ... * N_{k-1}),  coordinate_k = u_k + 1.
class GridSpec {
 public:
  GridSpec() = default;
  explicit GridSpec(std::vector<Index> dims);

  Index dim() const { return static_cast<Index>(dims_.size()); }
  Index size() const { return size_; }
  Index extent(Index axis) const { return dims_[axis]; }
  const std::vector<Index>& dims() const { return dims_; }

  // Multi-index (0-based) of a flat cell index.
  std::vector<Index> unravel(Index i) const;
  Index ravel(const std::vector<Index>& u) const;

  // d x size() matrix of 1-based cell coordinates.
  MatrixXd points() const;

  bool operator==(const GridSpec&) const = default;

 private:
  std::vector<Index> dims_;
  Index size_ = 0;
};

struct GridMeasure {
  GridSpec grid;
  VectorXd mass;

  GridMeasure() = default;
  GridMeasure(GridSpec g, VectorXd m);

  double total() const { return mass.sum(); }
};

// Partition of a fine grid into kappa^d hypercube blocks. Axes whose length
// is not a multiple of kappa are zero-padded up to the next multiple, so
// the last block along such an axis holds fewer real cells.
class CoarseningSpec {
 public:
  CoarseningSpec(const GridSpec& fine, Index kappa);

  Index kappa() const { return kappa_; }
  const GridSpec& fine() const { return fine_; }
  const GridSpec& coarse() const { return coarse_; }
  const std::vector<Index>& coarse_dims() const { return coarse_.dims(); }

  // Coarse block containing fine cell i.
  Index block_of(Index i) const { return block_of_[static_cast<std::size_t>(i)]; }

  // Real fine-coordinate range [lo, hi] (1-based, inclusive) of block b
  // along one axis.
  Index block_lo(Index /*axis*/, Index b) const { return b * kappa_ + 1; }
  Index block_hi(Index axis, Index b) const {
    return std::min((b + 1) * kappa_, fine_.extent(axis));
  }
  double block_center(Index axis, Index b) const {
    return 0.5 * static_cast<double>(block_lo(axis, b) + block_hi(axis, b));
  }

 private:
  GridSpec fine_;
  GridSpec coarse_;
  Index kappa_;
  std::vector<Index> block_of_;
};

/// Parses the GRID text format: optional '#' comment lines, a header
/// "d N1 ... Nd", then exactly N1*...*Nd whitespace-separated masses.
/// Masses are returned verbatim (not normalized).
GridMeasure load_grid_measure(std::istream& in);
GridMeasure parse_grid_measure(std::string_view text);

/// Writes the GRID text format with 17 significant digits.
void save_grid_measure(std::ostream& out, const GridMeasure& m);

GridMeasure normalize(const GridMeasure& m);

/// SumPool: every coarse cell holds the sum of its fine cells, accumulated in
/// ascending fine index.
GridMeasure coarsen_measure(const GridMeasure& m, const CoarseningSpec& c);

/// AvgPool of the coordinates: d x n^d matrix of block centers.
MatrixXd coarsen_grid(const CoarseningSpec& c);

/// Distance weights rho(xbar, x_i)^p from the grid center xbar (L2 metric).
VectorXd tv_weights(const GridSpec& g, double p);

/// Radius bound 1/2 * sqrt(sum_k N_k^2) (= 1/2 sqrt(d) N on cubic grids); it
/// dominates max_i rho(xbar, x_i).
double grid_radius(const GridSpec& g);

/// 2^(1-1/p) * <w, |a-b|>^(1/p).
template <typename DerivedA, typename DerivedB, typename DerivedW>
double weighted_tv(const Eigen::MatrixBase<DerivedA>& a,
                   const Eigen::MatrixBase<DerivedB>& b,
                   const Eigen::MatrixBase<DerivedW>& w, double p) {
  if (a.size() != b.size() || a.size() != w.size())
    throw Error(ErrorCode::GridMismatch, "weighted_tv operands differ in size");
  const double inner = w.cwiseProduct((a - b).cwiseAbs()).sum();
  return std::pow(2.0, 1.0 - 1.0 / p) * std::pow(inner, 1.0 / p);
}

double weighted_tv(const GridMeasure& a, const GridMeasure& b,
                   const VectorXd& w, double p);

}  // namespace wbounds

#endif  // WBOUNDS_MEASURES_HPP
