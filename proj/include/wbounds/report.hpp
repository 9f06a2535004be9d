#ifndef WBOUNDS_REPORT_HPP
#define WBOUNDS_REPORT_HPP

#include <cmath>
#include <limits>
#include <string>

#include "wbounds/measures.hpp"

namespace wbounds {

// Outcome of one bound computation on one measure pair.
struct BoundReport {
  std::string method;
  // Bound in W_p units; lower bounds are clipped at 0.
  double value = 0.0;
  // Signed p-th root of the unclipped objective.
  double raw_value = 0.0;
  double transport_term = std::numeric_limits<double>::quiet_NaN();
  double delta_mu = 0.0;
  double delta_nu = 0.0;
  double wall_time = 0.0;
  Index iterations = 0;
  Index coarse_size = 0;
  bool converged = true;
  double marginal_gap = 0.0;
};

inline double signed_root(double v, double p) {
  return v < 0.0 ? -std::pow(-v, 1.0 / p) : std::pow(v, 1.0 / p);
}

}  // namespace wbounds

#endif  // WBOUNDS_REPORT_HPP
