#include "wbounds/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

namespace wbounds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

SyntheticClass parse_synthetic_class(const std::string& name) {
  if (name == "gaussians") return SyntheticClass::Gaussians;
  if (name == "shapes") return SyntheticClass::Shapes;
  if (name == "noise") return SyntheticClass::Noise;
  throw Error(ErrorCode::InvalidArgument, "unknown class '" + name + "'");
}

std::string to_string(SyntheticClass c) {
  switch (c) {
    case SyntheticClass::Gaussians: return "gaussians";
    case SyntheticClass::Shapes: return "shapes";
    case SyntheticClass::Noise: return "noise";
  }
  return "unknown";
}

GridMeasure gen_synthetic(SyntheticClass cls, Index n, Index d, std::uint64_t seed) {
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "synthetic measures need N >= 4");
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "synthetic measures need d >= 1");
  const GridSpec grid(std::vector<Index>(static_cast<std::size_t>(d), n));
  const MatrixXd pts = grid.points();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const double size = static_cast<double>(n);
  VectorXd mass = VectorXd::Zero(grid.size());

  switch (cls) {
    case SyntheticClass::Gaussians: {
      const int blobs = 1 + static_cast<int>(rng() % 3);
      for (int b = 0; b < blobs; ++b) {
        VectorXd center(d);
        for (Index k = 0; k < d; ++k) center[k] = uniform(1.0, size);
        const double sigma = uniform(size / 10.0, size / 4.0);
        const double weight = uniform(0.5, 1.0);
        for (Index i = 0; i < grid.size(); ++i)
          mass[i] += weight * std::exp(-(pts.col(i) - center).squaredNorm() / (2.0 * sigma * sigma));
      }
      break;
    }
    case SyntheticClass::Shapes: {
      const int shapes = 1 + static_cast<int>(rng() % 3);
      const Index max_side = std::max<Index>(1, n / 4);
      for (int s = 0; s < shapes; ++s) {
        const double intensity = uniform(0.5, 1.0);
        if (rng() % 2 == 0) {
          std::vector<Index> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
          for (Index k = 0; k < d; ++k) {
            const Index side = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(max_side));
            lo[k] = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n - side + 1));
            hi[k] = lo[k] + side - 1;
          }
          for (Index i = 0; i < grid.size(); ++i) {
            bool inside = true;
            for (Index k = 0; k < d && inside; ++k)
              inside = pts(k, i) >= static_cast<double>(lo[k]) && pts(k, i) <= static_cast<double>(hi[k]);
            if (inside) mass[i] += intensity;
          }
        } else {
          VectorXd center(d);
          for (Index k = 0; k < d; ++k)
            center[k] = static_cast<double>(1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n)));
          const double radius = uniform(1.0, std::max(1.0, size / 8.0));
          for (Index i = 0; i < grid.size(); ++i)
            if ((pts.col(i) - center).norm() <= radius) mass[i] += intensity;
        }
      }
      break;
    }
    case SyntheticClass::Noise: {
      for (Index i = 0; i < grid.size(); ++i) mass[i] = uniform(0.01, 1.0);
      break;
    }
  }
  return normalize(GridMeasure(grid, std::move(mass)));
}

const std::vector<std::string>& method_ids() {
  static const std::vector<std::string> ids{"exact",           "weighted_cost",  "min_cost",
                                            "primal_upscaling", "dual_upscaling", "reg_lower",
                                            "reg_upper"};
  return ids;
}

bool is_lower_bound(const std::string& method) {
  return method == "min_cost" || method == "dual_upscaling" || method == "reg_lower";
}

bool is_regularized(const std::string& method) {
  return method == "reg_lower" || method == "reg_upper";
}

bool is_quantized(const std::string& method) {
  return method == "weighted_cost" || method == "min_cost" || method == "primal_upscaling" ||
         method == "dual_upscaling";
}

BoundReport run_method(const std::string& method, const GridMeasure& mu, const GridMeasure& nu,
                       double p, double param, std::optional<double> xi) {
  const double xi_value = xi.value_or(default_xi(mu.grid));
  if (method == "exact") return exact_distance(mu, nu, p);
  if (is_quantized(method)) {
    const auto kappa = static_cast<Index>(param);
    if (kappa < 1 || static_cast<double>(kappa) != param)
      throw Error(ErrorCode::InvalidArgument, "kappa must be a positive integer");
    if (method == "weighted_cost") return weighted_cost_upper_bound(mu, nu, kappa, p);
    if (method == "min_cost") return min_cost_lower_bound(mu, nu, kappa, p);
    if (method == "primal_upscaling") return primal_upscaling_upper_bound(mu, nu, kappa, p, xi_value);
    return dual_upscaling_lower_bound(mu, nu, kappa, p);
  }
  if (is_regularized(method)) {
    Index side = 0;
    for (Index n : mu.grid.dims()) side = std::max(side, n);
    RegularizationParams prm;
    prm.epsilon = param * std::pow(static_cast<double>(side), p);
    prm.xi = xi_value;
    return method == "reg_lower" ? reg_lower_bound(mu, nu, p, prm) : reg_upper_bound(mu, nu, p, prm);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
}

std::vector<std::string> resolve_methods(const std::vector<std::string>& methods) {
  std::vector<std::string> out;
  for (const std::string& m : methods) {
    if (m == "all") {
      out = method_ids();
      break;
    }
    if (std::find(method_ids().begin(), method_ids().end(), m) == method_ids().end())
      throw Error(ErrorCode::InvalidArgument, "unknown method '" + m + "'");
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no methods selected");
  std::sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
    const auto& ids = method_ids();
    return std::find(ids.begin(), ids.end(), a) < std::find(ids.begin(), ids.end(), b);
  });
  return out;
}

void validate(const BenchConfig& cfg) {
  if (cfg.classes.empty()) throw Error(ErrorCode::InvalidArgument, "no classes selected");
  for (const auto& c : cfg.classes) parse_synthetic_class(c);
  if (cfg.n < 4) throw Error(ErrorCode::InvalidArgument, "--n must be >= 4");
  if (cfg.d < 1) throw Error(ErrorCode::InvalidArgument, "--d must be >= 1");
  if (cfg.pairs < 1) throw Error(ErrorCode::InvalidArgument, "--pairs must be >= 1");
  if (cfg.p.empty()) throw Error(ErrorCode::InvalidArgument, "no p values");
  for (double p : cfg.p)
    if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
  for (Index k : cfg.kappa)
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "kappa must be >= 1");
  for (double e : cfg.eps)
    if (!(e > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps multipliers must be positive");
  if (cfg.xi && !(*cfg.xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "xi must be positive");
  if (cfg.threads < 1) throw Error(ErrorCode::InvalidArgument, "threads must be >= 1");

  const auto methods = resolve_methods(cfg.methods);
  double cells = 1.0;
  for (Index k = 0; k < cfg.d; ++k) cells *= static_cast<double>(cfg.n);
  const bool needs_fine = std::any_of(methods.begin(), methods.end(), [](const std::string& m) {
    return m == "exact" || is_regularized(m);
  });
  if (needs_fine && cells > static_cast<double>(kMaxKernelCells))
    throw Error(ErrorCode::SizeLimit, "N^d must be <= 65536 when exact or reg methods run");
  const bool quant = std::any_of(methods.begin(), methods.end(), is_quantized);
  if (quant && cfg.kappa.empty()) throw Error(ErrorCode::InvalidArgument, "no kappa values");
  const bool reg = std::any_of(methods.begin(), methods.end(), is_regularized);
  if (reg && cfg.eps.empty()) throw Error(ErrorCode::InvalidArgument, "no eps values");
}

double relative_error(const std::string& method, double bound, double exact) {
  if (std::isnan(bound) || std::isnan(exact)) return kNaN;
  const double diff = is_lower_bound(method) ? exact - bound : bound - exact;
  if (exact == 0.0) return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  return diff / exact;
}

std::vector<ReportRow> bench_run(const BenchConfig& cfg) {
  validate(cfg);
  const auto methods = resolve_methods(cfg.methods);
  const bool with_exact = std::find(methods.begin(), methods.end(), "exact") != methods.end();

  struct PairJob {
    Index index;
    std::string id;
    SyntheticClass cls;
    std::uint64_t seed_mu, seed_nu;
  };
  std::vector<PairJob> jobs;
  for (const auto& name : cfg.classes) {
    const SyntheticClass cls = parse_synthetic_class(name);
    for (Index k = 0; k < cfg.pairs; ++k) {
      const auto idx = static_cast<Index>(jobs.size());
      const auto stream = static_cast<std::uint64_t>(2 * idx);
      jobs.push_back({idx, name + "-" + std::to_string(k), cls, mix_seed(cfg.seed, stream),
                      mix_seed(cfg.seed, stream + 1)});
    }
  }

  const auto run_pair = [&](const PairJob& job) {
    std::vector<ReportRow> rows;
    const GridMeasure mu = gen_synthetic(job.cls, cfg.n, cfg.d, job.seed_mu);
    const GridMeasure nu = gen_synthetic(job.cls, cfg.n, cfg.d, job.seed_nu);
    for (double p : cfg.p) {
      double exact = kNaN, exact_time = kNaN;
      std::string exact_error;
      if (with_exact) {
        try {
          const BoundReport r = exact_distance(mu, nu, p);
          exact = r.value;
          exact_time = r.wall_time;
        } catch (const Error& e) {
          exact_error = e.what();
        }
      }
      for (const auto& method : methods) {
        std::vector<double> params{0.0};
        if (is_quantized(method)) {
          params.clear();
          for (Index k : cfg.kappa) params.push_back(static_cast<double>(k));
        } else if (is_regularized(method)) {
          params = cfg.eps;
        }
        for (double param : params) {
          ReportRow row;
          row.pair_id = job.id;
          row.pair_index = job.index;
          row.method = method;
          row.p = p;
          row.param = param;
          row.exact = exact;
          if (method == "exact") {
            row.bound = exact;
            row.wall_time = exact_time;
            row.error = exact_error;
          } else {
            try {
              const BoundReport r = run_method(method, mu, nu, p, param, cfg.xi);
              row.bound = r.value;
              row.wall_time = r.wall_time;
            } catch (const Error& e) {
              row.bound = kNaN;
              row.wall_time = kNaN;
              row.error = e.what();
            }
          }
          row.rel_error = relative_error(method, row.bound, row.exact);
          row.rel_time = row.wall_time / exact_time;
          rows.push_back(std::move(row));
        }
      }
    }
    return rows;
  };

  std::vector<ReportRow> all;
  std::mutex lock;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      auto rows = run_pair(jobs[k]);
      const std::lock_guard<std::mutex> guard(lock);
      all.insert(all.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
  };
  const unsigned workers = std::min<unsigned>(cfg.threads, static_cast<unsigned>(jobs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const auto method_rank = [](const std::string& m) {
    const auto& ids = method_ids();
    return std::find(ids.begin(), ids.end(), m) - ids.begin();
  };
  std::sort(all.begin(), all.end(), [&](const ReportRow& a, const ReportRow& b) {
    if (a.pair_index != b.pair_index) return a.pair_index < b.pair_index;
    if (a.method != b.method) return method_rank(a.method) < method_rank(b.method);
    if (a.p != b.p) return a.p < b.p;
    return a.param < b.param;
  });
  return all;
}

void write_csv_row(std::ostream& out, const ReportRow& row) {
  out << csv_escape(row.pair_id) << ',' << row.method << ',' << format_double(row.p) << ','
      << format_double(row.param) << ',' << format_double(row.bound) << ','
      << format_double(row.exact) << ',' << format_double(row.rel_error) << ','
      << format_double(row.wall_time) << ',' << format_double(row.rel_time) << ','
      << csv_escape(row.error) << '\n';
}

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& row : rows) write_csv_row(out, row);
}

}  // namespace wbounds
