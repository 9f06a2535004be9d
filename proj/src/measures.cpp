#include "wbounds/measures.hpp"

#include <charconv>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace wbounds {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::ZeroTotalMass: return "ZeroTotalMass";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimsMismatch: return "DimsMismatch";
    case ErrorCode::Unbalanced: return "Unbalanced";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::QuantizationResidual: return "QuantizationResidual";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

GridSpec::GridSpec(std::vector<Index> dims) : dims_(std::move(dims)) {
  if (dims_.empty())
    throw Error(ErrorCode::InvalidArgument, "grid needs at least one axis");
  size_ = 1;
  for (Index n : dims_) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "grid side length must be >= 1");
    size_ *= n;
  }
}

std::vector<Index> GridSpec::unravel(Index i) const {
  std::vector<Index> u(dims_.size());
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    u[k] = i % dims_[k];
    i /= dims_[k];
  }
  return u;
}

Index GridSpec::ravel(const std::vector<Index>& u) const {
  Index i = 0, stride = 1;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    i += u[k] * stride;
    stride *= dims_[k];
  }
  return i;
}

MatrixXd GridSpec::points() const {
  MatrixXd pts(dim(), size_);
  Index stride = 1;
  for (Index k = 0; k < dim(); ++k) {
    for (Index i = 0; i < size_; ++i)
      pts(k, i) = static_cast<double>((i / stride) % dims_[k] + 1);
    stride *= dims_[k];
  }
  return pts;
}

GridMeasure::GridMeasure(GridSpec g, VectorXd m) : grid(std::move(g)), mass(std::move(m)) {
  if (mass.size() != grid.size())
    throw Error(ErrorCode::CountMismatch, "mass vector length " + std::to_string(mass.size()) +
                                              " != cell count " + std::to_string(grid.size()));
}

CoarseningSpec::CoarseningSpec(const GridSpec& fine, Index kappa) : fine_(fine), kappa_(kappa) {
  if (kappa < 1) throw Error(ErrorCode::InvalidArgument, "kappa must be >= 1");
  std::vector<Index> cdims;
  for (Index n : fine.dims()) cdims.push_back((n + kappa - 1) / kappa);
  coarse_ = GridSpec(cdims);

  block_of_.resize(static_cast<std::size_t>(fine.size()));
  std::vector<Index> u(fine.dims().size(), 0);
  for (Index i = 0; i < fine.size(); ++i) {
    Index b = 0, stride = 1;
    for (std::size_t k = 0; k < u.size(); ++k) {
      b += (u[k] / kappa) * stride;
      stride *= cdims[k];
    }
    block_of_[static_cast<std::size_t>(i)] = b;
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (++u[k] < fine.dims()[k]) break;
      u[k] = 0;
    }
  }
}

namespace {

[[noreturn]] void parse_fail(ErrorCode code, Index line, const std::string& msg) {
  throw Error(code, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace

GridMeasure load_grid_measure(std::istream& in) {
  std::string line;
  Index line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    have_header = true;
    break;
  }
  if (!have_header) parse_fail(ErrorCode::MalformedHeader, line_no, "missing header");

  std::istringstream header(line);
  std::vector<long long> fields;
  std::string tok;
  while (header >> tok) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      parse_fail(ErrorCode::MalformedHeader, line_no, "non-integer header field '" + tok + "'");
    fields.push_back(v);
  }
  if (fields.empty() || fields[0] < 1)
    parse_fail(ErrorCode::MalformedHeader, line_no, "dimension must be >= 1");
  const auto d = static_cast<std::size_t>(fields[0]);
  if (fields.size() != d + 1)
    parse_fail(ErrorCode::MalformedHeader, line_no,
               "expected " + std::to_string(d) + " side lengths, got " +
                   std::to_string(fields.size() - 1));
  std::vector<Index> dims;
  for (std::size_t k = 1; k <= d; ++k) {
    if (fields[k] < 1) parse_fail(ErrorCode::MalformedHeader, line_no, "side length must be >= 1");
    dims.push_back(static_cast<Index>(fields[k]));
  }
  GridSpec grid(dims);

  VectorXd mass(grid.size());
  Index count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto lead = line.find_first_not_of(" \t\r");
    if (lead != std::string::npos && line[lead] == '#') continue;
    std::istringstream row(line);
    while (row >> tok) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        parse_fail(ErrorCode::CountMismatch, line_no, "invalid number '" + tok + "' at index " +
                                                          std::to_string(count));
      if (count >= grid.size())
        parse_fail(ErrorCode::CountMismatch, line_no,
                   "more than " + std::to_string(grid.size()) + " values");
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::NegativeMass, "index " + std::to_string(count) + " (line " +
                                                 std::to_string(line_no) + "): " + tok);
      mass[count++] = v;
    }
  }
  if (count != grid.size())
    throw Error(ErrorCode::CountMismatch, "expected " + std::to_string(grid.size()) +
                                              " values, got " + std::to_string(count));
  return {std::move(grid), std::move(mass)};
}

GridMeasure parse_grid_measure(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_grid_measure(in);
}

void save_grid_measure(std::ostream& out, const GridMeasure& m) {
  out << m.grid.dim();
  for (Index n : m.grid.dims()) out << ' ' << n;
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < m.mass.size(); ++i)
    out << m.mass[i] << ((i + 1) % m.grid.extent(0) == 0 ? '\n' : ' ');
}

GridMeasure normalize(const GridMeasure& m) {
  const double total = m.total();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroTotalMass, "cannot normalize a zero measure");
  if (!std::isfinite(total)) throw Error(ErrorCode::NumericOverflow, "total mass overflows");
  return {m.grid, m.mass / total};
}

GridMeasure coarsen_measure(const GridMeasure& m, const CoarseningSpec& c) {
  if (!(m.grid == c.fine()))
    throw Error(ErrorCode::GridMismatch, "measure grid differs from coarsening grid");
  VectorXd coarse = VectorXd::Zero(c.coarse().size());
  for (Index i = 0; i < m.mass.size(); ++i) coarse[c.block_of(i)] += m.mass[i];
  return {c.coarse(), std::move(coarse)};
}

MatrixXd coarsen_grid(const CoarseningSpec& c) {
  const GridSpec& g = c.coarse();
  MatrixXd centers(g.dim(), g.size());
  for (Index b = 0; b < g.size(); ++b) {
    const auto u = g.unravel(b);
    for (Index k = 0; k < g.dim(); ++k) centers(k, b) = c.block_center(k, u[k]);
  }
  return centers;
}

VectorXd tv_weights(const GridSpec& g, double p) {
  const MatrixXd pts = g.points();
  const VectorXd center = pts.rowwise().mean();
  VectorXd w(g.size());
  for (Index i = 0; i < g.size(); ++i) w[i] = std::pow((pts.col(i) - center).norm(), p);
  return w;
}

double grid_radius(const GridSpec& g) {
  double s = 0.0;
  for (Index n : g.dims()) s += static_cast<double>(n) * static_cast<double>(n);
  return 0.5 * std::sqrt(s);
}

double weighted_tv(const GridMeasure& a, const GridMeasure& b, const VectorXd& w, double p) {
  if (!(a.grid == b.grid)) throw Error(ErrorCode::GridMismatch, "weighted_tv on different grids");
  return weighted_tv(a.mass, b.mass, w, p);
}

}  // namespace wbounds
