#ifndef WBOUNDS_BENCH_HPP
#define WBOUNDS_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wbounds/bounds.hpp"
#include "wbounds/measures.hpp"

namespace wbounds {

enum class SyntheticClass { Gaussians, Shapes, Noise };

SyntheticClass parse_synthetic_class(const std::string& name);
std::string to_string(SyntheticClass c);

/// Deterministic normalized test measure on [N]^d.
///  - gaussians: 1-3 isotropic blobs (strictly positive everywhere)
///  - shapes: 1-3 filled boxes or disks on a zero background
///  - noise: i.i.d. uniform field
GridMeasure gen_synthetic(SyntheticClass cls, Index n, Index d, std::uint64_t seed);

// Method ids in canonical report order.
const std::vector<std::string>& method_ids();
bool is_lower_bound(const std::string& method);
bool is_regularized(const std::string& method);
bool is_quantized(const std::string& method);

// Runs one method. `param` is kappa for the quantization methods and the
// epsilon multiplier (epsilon = param * N^p) for the regularized ones;
// it is ignored for "exact".
BoundReport run_method(const std::string& method, const GridMeasure& mu, const GridMeasure& nu,
                       double p, double param, std::optional<double> xi = std::nullopt);

struct BenchConfig {
  std::vector<std::string> classes{"gaussians"};
  Index n = 32;
  Index d = 2;
  std::vector<double> p{1.0, 2.0};
  std::vector<Index> kappa{2, 4};
  std::vector<double> eps{0.001, 0.004};
  std::optional<double> xi;
  Index pairs = 10;
  std::uint64_t seed = 42;
  std::vector<std::string> methods{"all"};
  unsigned threads = 1;
};

/// Throws InvalidArgument / SizeLimit on an inconsistent configuration.
void validate(const BenchConfig& cfg);

/// Expands "all" and checks every id.
std::vector<std::string> resolve_methods(const std::vector<std::string>& methods);

struct ReportRow {
  std::string pair_id;
  Index pair_index = 0;
  std::string method;
  double p = 0.0;
  double param = 0.0;
  double bound = 0.0;
  double exact = 0.0;
  double rel_error = 0.0;
  double wall_time = 0.0;
  double rel_time = 0.0;
  std::string error;
};

/// Signed relative error: (b - e) / e for upper bounds, (e - b) / e for
/// lower bounds, 0 when both vanish.
double relative_error(const std::string& method, double bound, double exact);

/// One row per (pair, method, p, param); the exact baseline is solved once
/// per (pair, p). Rows are sorted by (pair, method, p, param).
std::vector<ReportRow> bench_run(const BenchConfig& cfg);

inline constexpr const char* kCsvHeader =
    "pair,method,p,param,bound,exact,rel_error,wall_time,rel_time,error";

void write_csv_row(std::ostream& out, const ReportRow& row);
void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace wbounds

#endif  // WBOUNDS_BENCH_HPP
