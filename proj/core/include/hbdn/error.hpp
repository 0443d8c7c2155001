#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hbdn {

enum class ErrorKind {
  InvalidArgument,
  InvalidDegree,
  GenerationFailure,
  NotConnected,
  DimensionMismatch,
  FactorizationFailure,
  NonConvergence,
  MaxIterations,
  Divergence,
  Infeasible,
  EmptyRegion,
  InsufficientTrace,
  DegenerateLabels,
  RankDeficient,
  ParseError,
  InconsistentWidth,
  ConfigInvalid,
  Io,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidDegree: return "invalid-degree";
    case ErrorKind::GenerationFailure: return "generation-failure";
    case ErrorKind::NotConnected: return "not-connected";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::FactorizationFailure: return "factorization-failure";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::MaxIterations: return "max-iterations";
    case ErrorKind::Divergence: return "divergence-detected";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::EmptyRegion: return "empty-region";
    case ErrorKind::InsufficientTrace: return "insufficient-trace";
    case ErrorKind::DegenerateLabels: return "degenerate-labels";
    case ErrorKind::RankDeficient: return "rank-deficiency";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::InconsistentWidth: return "inconsistent-width";
    case ErrorKind::ConfigInvalid: return "config-invalid";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hbdn
