// Command line front end: `bench` runs the synthetic method matrix and
// writes a CSV report, `dist` bounds the distance between two GRID files.
//
// Exit codes: 0 success, 1 validation error, 2 method failure.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wbounds/bench.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitMethod = 2;

wbounds::GridMeasure read_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw wbounds::Error(wbounds::ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  try {
    return wbounds::normalize(wbounds::load_grid_measure(in));
  } catch (const wbounds::Error& e) {
    throw wbounds::Error(e.code(), path + ": " + e.what());
  }
}

int run_bench(const wbounds::BenchConfig& cfg, const std::string& out_path) {
  try {
    wbounds::validate(cfg);
  } catch (const wbounds::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  const auto rows = wbounds::bench_run(cfg);
  if (out_path.empty() || out_path == "-") {
    wbounds::write_csv(std::cout, rows);
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write '" << out_path << "'\n";
      return kExitValidation;
    }
    wbounds::write_csv(out, rows);
  }
  return 0;
}

struct DistArgs {
  std::string mu, nu, method = "weighted_cost";
  wbounds::Index kappa = 2;
  double p = 2.0;
  double eps = 0.001;
  std::optional<double> xi;
  std::string interp = "multilinear";
  bool exact = false;
};

int run_dist(const DistArgs& a) {
  using namespace wbounds;
  GridMeasure mu, nu;
  double param = 0.0;
  Interpolation interp = Interpolation::Multilinear;
  try {
    mu = read_measure(a.mu);
    nu = read_measure(a.nu);
    if (!(mu.grid == nu.grid)) throw Error(ErrorCode::GridMismatch, "measures live on different grids");
    resolve_methods({a.method});
    if (!(a.p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
    if (a.kappa < 1) throw Error(ErrorCode::InvalidArgument, "kappa must be >= 1");
    if (!(a.eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    if (a.xi && !(*a.xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "xi must be positive");
    if (a.interp == "nearest") interp = Interpolation::Nearest;
    else if (a.interp != "multilinear") throw Error(ErrorCode::InvalidArgument, "unknown interpolation '" + a.interp + "'");
    if ((a.method == "exact" || a.exact || is_regularized(a.method)) && mu.grid.size() > kMaxKernelCells)
      throw Error(ErrorCode::SizeLimit, "exact and reg methods need at most 65536 cells");
    if (is_quantized(a.method)) param = static_cast<double>(a.kappa);
    if (is_regularized(a.method)) param = a.eps;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  ReportRow row;
  row.pair_id = a.mu + "|" + a.nu;
  row.method = a.method;
  row.p = a.p;
  row.param = param;
  row.exact = std::numeric_limits<double>::quiet_NaN();
  row.rel_time = std::numeric_limits<double>::quiet_NaN();
  int status = 0;
  try {
    double exact_time = std::numeric_limits<double>::quiet_NaN();
    if (a.exact || a.method == "exact") {
      const BoundReport e = exact_distance(mu, nu, a.p);
      row.exact = e.value;
      exact_time = e.wall_time;
    }
    BoundReport r;
    if (a.method == "dual_upscaling") r = dual_upscaling_lower_bound(mu, nu, a.kappa, a.p, interp);
    else if (a.method == "exact") r = exact_distance(mu, nu, a.p);
    else r = run_method(a.method, mu, nu, a.p, param, a.xi);
    row.bound = r.value;
    row.wall_time = r.wall_time;
    row.rel_time = r.wall_time / exact_time;
  } catch (const Error& e) {
    row.bound = std::numeric_limits<double>::quiet_NaN();
    row.wall_time = std::numeric_limits<double>::quiet_NaN();
    row.error = e.what();
    status = kExitMethod;
  }
  row.rel_error = relative_error(row.method, row.bound, row.exact);
  write_csv_row(std::cout, row);
  if (status != 0) std::cerr << "error: " << row.error << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Upper and lower bounds on Wasserstein-p distances between grid measures"};
  app.require_subcommand(1);

  wbounds::BenchConfig cfg;
  std::string out_path;
  double xi = 0.0;
  auto* bench = app.add_subcommand("bench", "Run the bound methods on synthetic measure pairs");
  bench->add_option("--class", cfg.classes, "gaussians, shapes, noise")->delimiter(',');
  bench->add_option("--n", cfg.n, "cells per axis")->capture_default_str();
  bench->add_option("--d", cfg.d, "dimension")->capture_default_str();
  bench->add_option("--p", cfg.p, "cost exponents")->delimiter(',');
  bench->add_option("--kappa", cfg.kappa, "coarsening factors")->delimiter(',');
  bench->add_option("--eps", cfg.eps, "regularization as multiples of N^p")->delimiter(',');
  auto* xi_opt = bench->add_option("--xi", xi, "IPF marginal tolerance (default 1e-9 * N^d)");
  bench->add_option("--pairs", cfg.pairs, "pairs per class")->capture_default_str();
  bench->add_option("--seed", cfg.seed, "generator seed")->capture_default_str();
  bench->add_option("--methods", cfg.methods, "method ids or 'all'")->delimiter(',');
  bench->add_option("--out", out_path, "CSV path (stdout when omitted)");
  bench->add_option("--threads", cfg.threads, "worker threads")->capture_default_str();

  DistArgs dist_args;
  double dist_xi = 0.0;
  auto* dist = app.add_subcommand("dist", "Bound the distance between two GRID files");
  dist->add_option("--mu", dist_args.mu, "source GRID file")->required();
  dist->add_option("--nu", dist_args.nu, "target GRID file")->required();
  dist->add_option("--method", dist_args.method, "method id")->capture_default_str();
  dist->add_option("--kappa", dist_args.kappa, "coarsening factor")->capture_default_str();
  dist->add_option("--p", dist_args.p, "cost exponent")->capture_default_str();
  dist->add_option("--eps", dist_args.eps, "regularization as a multiple of N^p")->capture_default_str();
  auto* dist_xi_opt = dist->add_option("--xi", dist_xi, "IPF marginal tolerance");
  dist->add_option("--interp", dist_args.interp, "multilinear or nearest")->capture_default_str();
  dist->add_flag("--exact", dist_args.exact, "also solve the exact problem for the error columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (bench->parsed()) {
    if (*xi_opt) cfg.xi = xi;
    return run_bench(cfg, out_path);
  }
  if (*dist_xi_opt) dist_args.xi = dist_xi;
  return run_dist(dist_args);
}
