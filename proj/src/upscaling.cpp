#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

#include "wbounds/bounds.hpp"

namespace wbounds {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Index int_pow(Index base, Index exp) {
  Index r = 1;
  for (Index k = 0; k < exp; ++k) r *= base;
  return r;
}

// Real fine cells of every coarse block as (fine index, in-block offset).
std::vector<std::vector<std::pair<Index, Index>>> block_cells(const CoarseningSpec& c) {
  const GridSpec& fine = c.fine();
  const Index d = fine.dim(), kappa = c.kappa();
  std::vector<std::vector<std::pair<Index, Index>>> cells(static_cast<std::size_t>(c.coarse().size()));
  for (Index i = 0; i < fine.size(); ++i) {
    const auto u = fine.unravel(i);
    Index offset = 0, stride = 1;
    for (Index k = 0; k < d; ++k) {
      offset += (u[k] % kappa) * stride;
      stride *= kappa;
    }
    cells[static_cast<std::size_t>(c.block_of(i))].emplace_back(i, offset);
  }
  return cells;
}

SparseCoupling solve_coarse_center(const GridMeasure& mu, const GridMeasure& nu,
                                   const CoarseningSpec& c, double p, TransportSolution* out) {
  const GridMeasure mu_c = coarsen_measure(mu, c);
  const GridMeasure nu_c = coarsen_measure(nu, c);
  const CoarseCostMatrix cost = center_cost_matrix(c, p);
  TransportSolution sol = solve_transport(make_transport_problem(mu_c.mass, nu_c.mass, cost.values));
  if (out) *out = sol;
  return sol.coupling;
}

}  // namespace

UpscaleKernel::UpscaleKernel(Index kappa, Index dim, VectorXd weights)
    : kappa_(kappa), dim_(dim), block_cells_(int_pow(kappa, dim)), weights_(std::move(weights)) {
  if (kappa < 1 || dim < 1) throw Error(ErrorCode::InvalidArgument, "kernel needs kappa, d >= 1");
  if (weights_.size() != block_cells_ * block_cells_)
    throw Error(ErrorCode::DimsMismatch, "kernel needs kappa^(2d) weights");
  if ((weights_.array() < 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "kernel weights must be nonnegative");
  const double total = weights_.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroTotalMass, "kernel weights sum to zero");
  weights_ /= total;
}

UpscaleKernel UpscaleKernel::uniform(Index kappa, Index dim) {
  const Index cells = int_pow(kappa, 2 * dim);
  return UpscaleKernel(kappa, dim, VectorXd::Constant(cells, 1.0 / static_cast<double>(cells)));
}

SparseCoupling upscale_coupling(const SparseCoupling& coarse, const UpscaleKernel& kernel,
                                const CoarseningSpec& c) {
  if (coarse.rows != c.coarse().size() || coarse.cols != c.coarse().size())
    throw Error(ErrorCode::DimsMismatch, "coarse coupling does not live on the coarse grid");
  if (kernel.kappa() != c.kappa() || kernel.dim() != c.fine().dim())
    throw Error(ErrorCode::DimsMismatch, "kernel width or dimension differs from the coarsening");

  const auto cells = block_cells(c);
  SparseCoupling fine;
  fine.rows = fine.cols = c.fine().size();
  fine.triples.reserve(coarse.triples.size() * static_cast<std::size_t>(kernel.weights().size()));
  for (const Triplet& t : coarse.triples) {
    const auto& src = cells[static_cast<std::size_t>(t.row())];
    const auto& dst = cells[static_cast<std::size_t>(t.col())];
    double total = 0.0;
    for (const auto& [i, s] : src)
      for (const auto& [j, r] : dst) total += kernel(s, r);
    if (!(total > 0.0)) continue;
    const double scale = t.value() / total;
    for (const auto& [i, s] : src) {
      for (const auto& [j, r] : dst) {
        const double w = kernel(s, r);
        if (w > 0.0) fine.triples.emplace_back(i, j, scale * w);
      }
    }
  }
  return fine;
}

PrimalUpscaling primal_upscaling(const GridMeasure& mu, const GridMeasure& nu, Index kappa,
                                 double p, double xi, const std::optional<UpscaleKernel>& kernel,
                                 Index max_iter) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(mu.grid == nu.grid)) throw Error(ErrorCode::GridMismatch, "measures on different grids");
  const CoarseningSpec c(mu.grid, kappa);

  PrimalUpscaling out;
  TransportSolution coarse_sol;
  out.coarse = solve_coarse_center(mu, nu, c, p, &coarse_sol);

  const UpscaleKernel uniform = UpscaleKernel::uniform(kappa, mu.grid.dim());
  const UpscaleKernel& k = kernel ? *kernel : uniform;
  out.upscaled = upscale_coupling(out.coarse, k, c);
  try {
    out.fit = ipf_fit(out.upscaled.to_sparse(), mu.mass, nu.mass, xi, max_iter);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroDenominator || !kernel) throw;
    // Zero kernel entries left a positive cell unreachable: widen the
    // kernel support to the whole block pair once and refit.
    std::clog << "wbounds: " << e.what() << "; widening upscale kernel support\n";
    const UpscaleKernel widened(kappa, mu.grid.dim(), k.weights() + uniform.weights());
    out.upscaled = upscale_coupling(out.coarse, widened, c);
    out.fit = ipf_fit(out.upscaled.to_sparse(), mu.mass, nu.mass, xi, max_iter);
    out.kernel_widened = true;
  }

  const CostSpec cost(mu.grid, p);
  double transport = 0.0;
  for (const Triplet& t : out.upscaled.triples)
    transport += out.fit.a[t.row()] * t.value() * out.fit.b[t.col()] * cost(t.row(), t.col());

  const VectorXd w = tv_weights(mu.grid, p);
  BoundReport& r = out.report;
  r.method = "primal_upscaling";
  r.transport_term = std::pow(std::max(0.0, transport), 1.0 / p);
  r.delta_mu = weighted_tv(out.fit.mu_hat, mu.mass, w, p);
  r.delta_nu = weighted_tv(nu.mass, out.fit.nu_hat, w, p);
  r.value = r.raw_value = r.transport_term + r.delta_mu + r.delta_nu;
  r.iterations = out.fit.iterations;
  r.converged = out.fit.converged;
  r.marginal_gap = out.fit.marginal_gap;
  r.coarse_size = c.coarse().size();
  r.wall_time = seconds_since(t0);
  return out;
}

BoundReport primal_upscaling_upper_bound(const GridMeasure& mu, const GridMeasure& nu,
                                         Index kappa, double p, double xi,
                                         const std::optional<UpscaleKernel>& kernel) {
  return primal_upscaling(mu, nu, kappa, p, xi, kernel).report;
}

VectorXd interpolate_potential(const VectorXd& coarse_f, const CoarseningSpec& c,
                               Interpolation method) {
  const GridSpec& fine = c.fine();
  const GridSpec& coarse = c.coarse();
  if (coarse_f.size() != coarse.size())
    throw Error(ErrorCode::DimsMismatch, "coarse potential does not match the coarse grid");
  const Index d = fine.dim();
  VectorXd out(fine.size());

  if (method == Interpolation::Nearest) {
    for (Index i = 0; i < fine.size(); ++i) out[i] = coarse_f[c.block_of(i)];
    return out;
  }

  // Per axis and fine coordinate: bracketing blocks and the weight of the
  // upper one.
  struct Bracket {
    Index lo, hi;
    double t;
  };
  std::vector<std::vector<Bracket>> brackets(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k) {
    const Index nb = coarse.extent(k);
    auto& axis = brackets[static_cast<std::size_t>(k)];
    for (Index u = 0; u < fine.extent(k); ++u) {
      const double x = static_cast<double>(u + 1);
      if (x <= c.block_center(k, 0)) {
        axis.push_back({0, 0, 0.0});
      } else if (x >= c.block_center(k, nb - 1)) {
        axis.push_back({nb - 1, nb - 1, 0.0});
      } else {
        Index b = 0;
        while (c.block_center(k, b + 1) < x) ++b;
        const double c0 = c.block_center(k, b), c1 = c.block_center(k, b + 1);
        axis.push_back({b, b + 1, (x - c0) / (c1 - c0)});
      }
    }
  }

  std::vector<Index> corner(static_cast<std::size_t>(d));
  for (Index i = 0; i < fine.size(); ++i) {
    const auto u = fine.unravel(i);
    double value = 0.0;
    for (Index mask = 0; mask < (Index{1} << d); ++mask) {
      double weight = 1.0;
      for (Index k = 0; k < d; ++k) {
        const Bracket& br = brackets[static_cast<std::size_t>(k)][static_cast<std::size_t>(u[k])];
        const bool upper = (mask >> k) & 1;
        weight *= upper ? br.t : 1.0 - br.t;
        corner[static_cast<std::size_t>(k)] = upper ? br.hi : br.lo;
      }
      if (weight != 0.0) value += weight * coarse_f[coarse.ravel(corner)];
    }
    out[i] = value;
  }
  return out;
}

VectorXd c_transform(const VectorXd& potential, const CostSpec& cost, CTransformDirection dir) {
  const bool to_target = dir == CTransformDirection::ToTarget;
  const Index n_in = to_target ? cost.rows() : cost.cols();
  const Index n_out = to_target ? cost.cols() : cost.rows();
  if (potential.size() != n_in)
    throw Error(ErrorCode::DimsMismatch, "potential length does not match the cost");
  VectorXd out(n_out);
  for (Index j = 0; j < n_out; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n_in; ++i) {
      const double v = (to_target ? cost(i, j) : cost(j, i)) - potential[i];
      if (v < best) best = v;
    }
    out[j] = best;
  }
  return out;
}

DualUpscaling dual_upscaling(const GridMeasure& mu, const GridMeasure& nu, Index kappa, double p,
                             Interpolation method) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(mu.grid == nu.grid)) throw Error(ErrorCode::GridMismatch, "measures on different grids");
  const CoarseningSpec c(mu.grid, kappa);
  const GridMeasure mu_c = coarsen_measure(mu, c);
  const GridMeasure nu_c = coarsen_measure(nu, c);
  const CoarseCostMatrix coarse_cost = center_cost_matrix(c, p);
  const TransportProblem problem = make_transport_problem(mu_c.mass, nu_c.mass, coarse_cost.values);
  const TransportSolution sol = solve_transport(problem);

  // The solver only prices source blocks with mass; extend f~ to every
  // block as the c-transform of g~, which agrees with f~ on tight rows.
  DualUpscaling out;
  const Index nc = c.coarse().size();
  out.coarse_f.resize(nc);
  for (Index k = 0; k < nc; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < problem.target_index.size(); ++b) {
      const auto l = static_cast<Index>(b);
      best = std::min(best, coarse_cost.values(k, problem.target_index[b]) - sol.potentials.g[l]);
    }
    out.coarse_f[k] = best;
  }

  out.f_hat = interpolate_potential(out.coarse_f, c, method);
  const CostSpec cost(mu.grid, p);
  out.g = c_transform(out.f_hat, cost, CTransformDirection::ToTarget);
  out.f = c_transform(out.g, cost, CTransformDirection::ToSource);
  const double dual = out.f.dot(mu.mass) + out.g.dot(nu.mass);

  BoundReport& r = out.report;
  r.method = "dual_upscaling";
  r.transport_term = dual;
  r.raw_value = signed_root(dual, p);
  r.value = std::max(0.0, r.raw_value);
  r.iterations = sol.pivots;
  r.coarse_size = nc;
  r.wall_time = seconds_since(t0);
  return out;
}

BoundReport dual_upscaling_lower_bound(const GridMeasure& mu, const GridMeasure& nu, Index kappa,
                                       double p, Interpolation method) {
  return dual_upscaling(mu, nu, kappa, p, method).report;
}

}  // namespace wbounds
