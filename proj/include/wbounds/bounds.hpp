#ifndef WBOUNDS_BOUNDS_HPP
#define WBOUNDS_BOUNDS_HPP

#include <Eigen/Core>

#include <optional>

#include "wbounds/costs.hpp"
#include "wbounds/measures.hpp"
#include "wbounds/report.hpp"
#include "wbounds/sinkhorn.hpp"
#include "wbounds/transport.hpp"

namespace wbounds {

/// Exact W_p via the network simplex on the fine grid.
BoundReport exact_distance(const GridMeasure& mu, const GridMeasure& nu, double p);

/// L_{C_bar}(mu~, nu~)^(1/p): coarse OT under the marginally weighted cost.
BoundReport weighted_cost_upper_bound(const GridMeasure& mu, const GridMeasure& nu, Index kappa,
                                      double p);

/// L_{C_min}(mu~, nu~)^(1/p): coarse OT under the locally minimal cost.
BoundReport min_cost_lower_bound(const GridMeasure& mu, const GridMeasure& nu, Index kappa,
                                 double p);

// Normalized nonnegative 2d-tensor of width kappa used to spread one coarse
// coupling entry over the kappa^d x kappa^d fine cell pairs of its blocks.
// Entry (s, t) is stored at s * kappa^d + t, where s and t are the offsets
// of the source and target cells inside their blocks (axis 0 fastest).
class UpscaleKernel {
 public:
  UpscaleKernel(Index kappa, Index dim, VectorXd weights);
  static UpscaleKernel uniform(Index kappa, Index dim);

  Index kappa() const { return kappa_; }
  Index dim() const { return dim_; }
  Index block_cells() const { return block_cells_; }
  const VectorXd& weights() const { return weights_; }
  double operator()(Index src_offset, Index dst_offset) const {
    return weights_[src_offset * block_cells_ + dst_offset];
  }

 private:
  Index kappa_;
  Index dim_;
  Index block_cells_;
  VectorXd weights_;
};

/// Expands every coarse triple (k, l, m) into fine triples m * K_t over the
/// cell pairs of blocks X_k x Y_l. On padded blocks the kernel is
/// renormalized over the real cells so the block mass is preserved.
SparseCoupling upscale_coupling(const SparseCoupling& coarse, const UpscaleKernel& kernel,
                                const CoarseningSpec& c);

struct PrimalUpscaling {
  SparseCoupling coarse;
  SparseCoupling upscaled;
  IpfState fit;
  bool kernel_widened = false;
  BoundReport report;
};

/// Coarse OT under center costs, upscaled with `kernel` (uniform when
/// absent), IPF-fitted on the sparse support, plus weighted-TV corrections.
PrimalUpscaling primal_upscaling(const GridMeasure& mu, const GridMeasure& nu, Index kappa,
                                 double p, double xi,
                                 const std::optional<UpscaleKernel>& kernel = std::nullopt,
                                 Index max_iter = 10000);

BoundReport primal_upscaling_upper_bound(const GridMeasure& mu, const GridMeasure& nu,
                                         Index kappa, double p, double xi,
                                         const std::optional<UpscaleKernel>& kernel = std::nullopt);

enum class Interpolation { Nearest, Multilinear };

/// Evaluates a coarse potential at every fine cell. Multilinear
/// interpolation runs on the lattice of block centers and is clamped to
/// the outermost centers; nearest takes the value of the enclosing block.
VectorXd interpolate_potential(const VectorXd& coarse_f, const CoarseningSpec& c,
                               Interpolation method);

enum class CTransformDirection {
  ToTarget,  // out_j = min_i C_ij - in_i
  ToSource,  // out_i = min_j C_ij - in_j
};

/// Lazy c-transform; costs are evaluated on demand, ties keep the lowest index.
VectorXd c_transform(const VectorXd& potential, const CostSpec& cost, CTransformDirection dir);

struct DualUpscaling {
  VectorXd coarse_f;
  VectorXd f_hat;
  VectorXd f;
  VectorXd g;
  BoundReport report;
};

/// Coarse Kantorovich potentials under center costs, interpolated to the
/// fine grid and tightened by a double c-transform: g = f_hat^c, f = g^c.
DualUpscaling dual_upscaling(const GridMeasure& mu, const GridMeasure& nu, Index kappa, double p,
                             Interpolation method = Interpolation::Multilinear);

BoundReport dual_upscaling_lower_bound(const GridMeasure& mu, const GridMeasure& nu, Index kappa,
                                       double p,
                                       Interpolation method = Interpolation::Multilinear);

/// Default IPF threshold: 1e-9 per grid cell.
inline double default_xi(const GridSpec& g) { return 1e-9 * static_cast<double>(g.size()); }

}  // namespace wbounds

#endif  // WBOUNDS_BOUNDS_HPP
