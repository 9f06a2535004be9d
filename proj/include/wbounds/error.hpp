#ifndef WBOUNDS_ERROR_HPP
#define WBOUNDS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace wbounds {

enum class ErrorCode {
  MalformedHeader,
  NegativeMass,
  CountMismatch,
  ZeroTotalMass,
  GridMismatch,
  DimensionMismatch,
  DimsMismatch,
  Unbalanced,
  IterationLimit,
  QuantizationResidual,
  ZeroDenominator,
  NumericOverflow,
  SizeLimit,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; `code()` tells callers which
// precondition or numerical failure occurred.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wbounds

#endif  // WBOUNDS_ERROR_HPP
