#ifndef WBOUNDS_SINKHORN_HPP
#define WBOUNDS_SINKHORN_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "wbounds/costs.hpp"
#include "wbounds/measures.hpp"
#include "wbounds/report.hpp"

namespace wbounds {

struct RegularizationParams {
  double epsilon = 1.0;
  double xi = 1e-9;
  Index max_iter = 10000;
};

// Scalings of an IPF fit and the marginals of diag(a) K diag(b).
struct IpfState {
  VectorXd a;
  VectorXd b;
  VectorXd mu_hat;
  VectorXd nu_hat;
  Index iterations = 0;
  double marginal_gap = 0.0;
  bool converged = false;
};

namespace detail {

// num / den with 0 / anything = 0; a positive mass over a zero denominator
// means the kernel cannot reach that marginal.
inline void scale_into(VectorXd& out, const VectorXd& target, const VectorXd& denom,
                       const char* side) {
  out.resize(target.size());
  for (Index i = 0; i < target.size(); ++i) {
    if (target[i] == 0.0) {
      out[i] = 0.0;
    } else if (denom[i] > 0.0) {
      out[i] = target[i] / denom[i];
    } else {
      throw Error(ErrorCode::ZeroDenominator, std::string("kernel support misses ") + side +
                                                  " marginal at index " + std::to_string(i));
    }
  }
}

}  // namespace detail

/// Iterative proportional fitting of a nonnegative kernel (dense or sparse
/// Eigen matrix) to marginals (mu, nu): alternates a = mu / (K b) and
/// b = nu / (K^T a) from b = 1 until ||a.(Kb) - mu||_1 + ||nu - b.(K^T a)||_1
/// drops below xi or max_iter sweeps have run.
template <typename Kernel>
IpfState ipf_fit(const Kernel& kernel, const VectorXd& mu, const VectorXd& nu, double xi,
                 Index max_iter) {
  if (kernel.rows() != mu.size() || kernel.cols() != nu.size())
    throw Error(ErrorCode::DimsMismatch, "kernel shape does not match the marginals");
  if (!(xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "xi must be positive");
  IpfState s;
  s.b = VectorXd::Ones(nu.size());
  VectorXd kb = kernel * s.b;
  VectorXd kta;
  while (s.iterations < max_iter) {
    detail::scale_into(s.a, mu, kb, "row");
    kta = kernel.transpose() * s.a;
    detail::scale_into(s.b, nu, kta, "column");
    kb = kernel * s.b;
    s.mu_hat = s.a.cwiseProduct(kb);
    s.nu_hat = s.b.cwiseProduct(kta);
    ++s.iterations;
    s.marginal_gap = (s.mu_hat - mu).lpNorm<1>() + (nu - s.nu_hat).lpNorm<1>();
    if (s.marginal_gap < xi) {
      s.converged = true;
      break;
    }
  }
  return s;
}

/// Entropic dual lower bound (<f, mu> + <g, nu>)^(1/p) with f = eps log a,
/// g = eps log b after the last Sinkhorn sweep.
BoundReport reg_lower_bound(const GridMeasure& mu, const GridMeasure& nu, double p,
                            const RegularizationParams& params);

/// Entropic primal upper bound <pi, C>^(1/p) plus weighted-TV corrections
/// for the marginal mismatch of pi = diag(a) K diag(b).
BoundReport reg_upper_bound(const GridMeasure& mu, const GridMeasure& nu, double p,
                            const RegularizationParams& params);

/// Largest cell count for which the fine Gibbs kernel is materialized.
inline constexpr Index kMaxKernelCells = Index{1} << 16;

}  // namespace wbounds

#endif  // WBOUNDS_SINKHORN_HPP
