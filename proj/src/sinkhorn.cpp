#include "wbounds/sinkhorn.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace wbounds {

namespace {

constexpr double kScaleLo = 1e-100;
constexpr double kScaleHi = 1e100;

struct Support {
  std::vector<Index> src, dst;
  VectorXd mu, nu;
  RowMatrixXd cost;
};

Support restrict_to_support(const GridMeasure& mu, const GridMeasure& nu, double p) {
  if (!(mu.grid == nu.grid)) throw Error(ErrorCode::GridMismatch, "measures on different grids");
  if (mu.grid.size() > kMaxKernelCells)
    throw Error(ErrorCode::SizeLimit, "fine kernel limited to " + std::to_string(kMaxKernelCells) +
                                          " cells, got " + std::to_string(mu.grid.size()));
  Support s;
  for (Index i = 0; i < mu.mass.size(); ++i)
    if (mu.mass[i] > 0.0) s.src.push_back(i);
  for (Index j = 0; j < nu.mass.size(); ++j)
    if (nu.mass[j] > 0.0) s.dst.push_back(j);
  if (s.src.empty() || s.dst.empty()) throw Error(ErrorCode::ZeroTotalMass, "empty support");
  const auto n = static_cast<Index>(s.src.size()), m = static_cast<Index>(s.dst.size());
  const CostSpec spec(mu.grid, p);
  s.mu.resize(n);
  s.nu.resize(m);
  s.cost.resize(n, m);
  for (Index a = 0; a < n; ++a) {
    s.mu[a] = mu.mass[s.src[a]];
    for (Index b = 0; b < m; ++b) s.cost(a, b) = spec(s.src[a], s.dst[b]);
  }
  for (Index b = 0; b < m; ++b) s.nu[b] = nu.mass[s.dst[b]];
  return s;
}

struct EntropicFit {
  VectorXd f, g;
  VectorXd mu_hat, nu_hat;
  double transport = 0.0;
  Index iterations = 0;
  double gap = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool log_domain = false;
};

bool in_range(const VectorXd& v) {
  return (v.array() >= kScaleLo).all() && (v.array() <= kScaleHi).all();
}

// Sinkhorn in the log domain, continuing from potentials (f, g).
void fit_log_domain(const Support& s, const RegularizationParams& prm, EntropicFit& fit) {
  const double eps = prm.epsilon;
  const Index n = s.cost.rows(), m = s.cost.cols();
  const VectorXd log_mu = s.mu.array().log(), log_nu = s.nu.array().log();
  VectorXd col_max(m), col_sum(m);
  fit.log_domain = true;
  while (fit.iterations < prm.max_iter) {
    for (Index i = 0; i < n; ++i) {
      const Eigen::ArrayXd z = (fit.g.transpose() - s.cost.row(i)).array() / eps;
      const double zmax = z.maxCoeff();
      fit.f[i] = eps * log_mu[i] - eps * (zmax + std::log((z - zmax).exp().sum()));
    }
    col_max.setConstant(-std::numeric_limits<double>::infinity());
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j)
        col_max[j] = std::max(col_max[j], (fit.f[i] - s.cost(i, j)) / eps);
    col_sum.setZero();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) col_sum[j] += std::exp((fit.f[i] - s.cost(i, j)) / eps - col_max[j]);
    for (Index j = 0; j < m; ++j)
      fit.g[j] = eps * log_nu[j] - eps * (col_max[j] + std::log(col_sum[j]));

    fit.mu_hat.setZero(n);
    fit.nu_hat.setZero(m);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) {
        const double pij = std::exp((fit.f[i] + fit.g[j] - s.cost(i, j)) / eps);
        fit.mu_hat[i] += pij;
        fit.nu_hat[j] += pij;
      }
    }
    ++fit.iterations;
    fit.gap = (fit.mu_hat - s.mu).lpNorm<1>() + (s.nu - fit.nu_hat).lpNorm<1>();
    if (!std::isfinite(fit.gap))
      throw Error(ErrorCode::NumericOverflow, "log-domain Sinkhorn produced non-finite marginals");
    if (fit.gap < prm.xi) {
      fit.converged = true;
      break;
    }
  }
  fit.transport = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      fit.transport += std::exp((fit.f[i] + fit.g[j] - s.cost(i, j)) / eps) * s.cost(i, j);
}

// Plain scaling Sinkhorn as in the textbook loop; switches to the log
// domain when the kernel underflows or a scaling leaves [1e-100, 1e100].
EntropicFit fit_entropic(const Support& s, const RegularizationParams& prm) {
  if (!(prm.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!(prm.xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "xi must be positive");
  if (prm.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  const double eps = prm.epsilon;
  const Index n = s.cost.rows(), m = s.cost.cols();
  EntropicFit fit;
  fit.f = VectorXd::Zero(n);
  fit.g = VectorXd::Zero(m);

  const RowMatrixXd kernel = (-s.cost.array() / eps).exp().matrix();
  if ((kernel.array() <= 0.0).any()) {
    fit_log_domain(s, prm, fit);
    return fit;
  }

  VectorXd a = VectorXd::Ones(n);
  VectorXd b = (fit.g / eps).array().exp().matrix();
  VectorXd kb = kernel * b, kta;
  while (fit.iterations < prm.max_iter) {
    const VectorXd a_next = s.mu.cwiseQuotient(kb);
    kta = kernel.transpose() * a_next;
    const VectorXd b_next = s.nu.cwiseQuotient(kta);
    if (!in_range(a_next) || !in_range(b_next)) {
      fit.f = eps * a.array().log().matrix();
      fit.g = eps * b.array().log().matrix();
      fit_log_domain(s, prm, fit);
      return fit;
    }
    a = a_next;
    b = b_next;
    kb = kernel * b;
    fit.mu_hat = a.cwiseProduct(kb);
    fit.nu_hat = b.cwiseProduct(kta);
    ++fit.iterations;
    fit.gap = (fit.mu_hat - s.mu).lpNorm<1>() + (s.nu - fit.nu_hat).lpNorm<1>();
    if (fit.gap < prm.xi) {
      fit.converged = true;
      break;
    }
  }
  fit.f = eps * a.array().log().matrix();
  fit.g = eps * b.array().log().matrix();
  fit.transport = (a.asDiagonal() * kernel.cwiseProduct(s.cost) * b.asDiagonal()).sum();
  return fit;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BoundReport reg_lower_bound(const GridMeasure& mu, const GridMeasure& nu, double p,
                            const RegularizationParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const Support s = restrict_to_support(mu, nu, p);
  const EntropicFit fit = fit_entropic(s, params);
  const double dual = fit.f.dot(s.mu) + fit.g.dot(s.nu);

  BoundReport r;
  r.method = "reg_lower";
  r.raw_value = signed_root(dual, p);
  r.value = std::max(0.0, r.raw_value);
  r.iterations = fit.iterations;
  r.converged = fit.converged;
  r.marginal_gap = fit.gap;
  r.wall_time = seconds_since(t0);
  return r;
}

BoundReport reg_upper_bound(const GridMeasure& mu, const GridMeasure& nu, double p,
                            const RegularizationParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const Support s = restrict_to_support(mu, nu, p);
  const EntropicFit fit = fit_entropic(s, params);

  const VectorXd w_full = tv_weights(mu.grid, p);
  VectorXd w_src(s.src.size()), w_dst(s.dst.size());
  for (std::size_t a = 0; a < s.src.size(); ++a) w_src[static_cast<Index>(a)] = w_full[s.src[a]];
  for (std::size_t b = 0; b < s.dst.size(); ++b) w_dst[static_cast<Index>(b)] = w_full[s.dst[b]];

  BoundReport r;
  r.method = "reg_upper";
  r.transport_term = std::pow(std::max(0.0, fit.transport), 1.0 / p);
  r.delta_mu = weighted_tv(fit.mu_hat, s.mu, w_src, p);
  r.delta_nu = weighted_tv(s.nu, fit.nu_hat, w_dst, p);
  r.value = r.raw_value = r.transport_term + r.delta_mu + r.delta_nu;
  r.iterations = fit.iterations;
  r.converged = fit.converged;
  r.marginal_gap = fit.gap;
  r.wall_time = seconds_since(t0);
  return r;
}

}  // namespace wbounds
