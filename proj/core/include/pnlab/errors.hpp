#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pnlab {

enum class ErrorCode {
  ConfigInvalid,
  NonConverged,
  NoRoot,
  CflViolation,
  NonFinite,
  MonotonicityViolation,
  FluxOutOfRange,
  DomainTooNarrow,
  ContainmentViolation,
  BoundaryOrderViolation,
  IoFailure,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Thrown when an iterative solve exhausts its sweep budget. Carries the last
// iterate and the residual it stalled at so callers can inspect or restart.
class NonConverged : public Error {
 public:
  NonConverged(const std::string& what, std::vector<double> last, double residual)
      : Error(ErrorCode::NonConverged, what), last_iterate(std::move(last)), residual(residual) {}
  std::vector<double> last_iterate;
  double residual = 0.0;
};

}  // namespace pnlab
