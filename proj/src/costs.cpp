#include "wbounds/costs.hpp"

#include <algorithm>

namespace wbounds {

CostSpec::CostSpec(MatrixXd source, MatrixXd target, double p, Metric metric)
    : source_(std::move(source)), target_(std::move(target)), p_(p), metric_(metric) {
  if (source_.rows() != target_.rows())
    throw Error(ErrorCode::DimensionMismatch, "source and target points differ in dimension");
  if (!(p_ >= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
}

CostSpec::CostSpec(const GridSpec& grid, double p) : CostSpec(grid.points(), grid.points(), p) {}

RowMatrixXd CostSpec::materialize() const {
  RowMatrixXd c(rows(), cols());
  for (Index i = 0; i < rows(); ++i)
    for (Index j = 0; j < cols(); ++j) c(i, j) = (*this)(i, j);
  return c;
}

CoarseCostMatrix center_cost_matrix(const MatrixXd& coarse_src, const MatrixXd& coarse_dst,
                                    double p) {
  CostSpec spec(coarse_src, coarse_dst, p);
  return {CoarseCostKind::Center, spec.materialize(),
          ArrayXXb::Constant(spec.rows(), spec.cols(), true), 0};
}

CoarseCostMatrix center_cost_matrix(const CoarseningSpec& c, double p) {
  const MatrixXd centers = coarsen_grid(c);
  CoarseCostMatrix out = center_cost_matrix(centers, centers, p);
  out.kappa = c.kappa();
  return out;
}

CoarseCostMatrix weighted_cost_matrix(const GridMeasure& mu, const GridMeasure& nu,
                                      const CoarseningSpec& c, double p) {
  if (!(mu.grid == c.fine()) || !(nu.grid == c.fine()))
    throw Error(ErrorCode::GridMismatch, "weighted cost needs both measures on the fine grid");
  const Index n = c.coarse().size();
  const VectorXd mu_c = coarsen_measure(mu, c).mass;
  const VectorXd nu_c = coarsen_measure(nu, c).mass;
  const MatrixXd pts = c.fine().points();

  std::vector<Index> src, dst;
  for (Index i = 0; i < mu.mass.size(); ++i)
    if (mu.mass[i] > 0.0) src.push_back(i);
  for (Index j = 0; j < nu.mass.size(); ++j)
    if (nu.mass[j] > 0.0) dst.push_back(j);

  RowMatrixXd acc = RowMatrixXd::Zero(n, n);
  for (Index i : src) {
    const Index k = c.block_of(i);
    const double mi = mu.mass[i];
    for (Index j : dst) {
      acc(k, c.block_of(j)) += pair_cost(pts.col(i), pts.col(j), p) * mi * nu.mass[j];
    }
  }

  CoarseCostMatrix out = center_cost_matrix(c, p);
  out.kind = CoarseCostKind::Weighted;
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < n; ++l) {
      const double w = mu_c[k] * nu_c[l];
      if (w > 0.0) {
        out.values(k, l) = acc(k, l) / w;
      } else {
        out.used(k, l) = false;
      }
    }
  }
  return out;
}

CoarseCostMatrix min_cost_matrix(const CoarseningSpec& c, double p) {
  const GridSpec& g = c.coarse();
  const Index n = g.size();
  const Index d = g.dim();
  std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(n));
  for (Index b = 0; b < n; ++b) blocks[static_cast<std::size_t>(b)] = g.unravel(b);

  RowMatrixXd values(n, n);
  for (Index k = 0; k < n; ++k) {
    const auto& u = blocks[static_cast<std::size_t>(k)];
    for (Index l = 0; l < n; ++l) {
      const auto& v = blocks[static_cast<std::size_t>(l)];
      double sq = 0.0;
      for (Index a = 0; a < d; ++a) {
        const Index gap = std::max<Index>(
            {0, c.block_lo(a, v[a]) - c.block_hi(a, u[a]), c.block_lo(a, u[a]) - c.block_hi(a, v[a])});
        sq += static_cast<double>(gap * gap);
      }
      values(k, l) = power_of_distance(sq, p);
    }
  }
  return {CoarseCostKind::Min, std::move(values), ArrayXXb::Constant(n, n, true), c.kappa()};
}

}  // namespace wbounds
