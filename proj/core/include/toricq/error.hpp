#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toricq {

enum class ErrorCode {
  // polytope validation
  NonPrimitiveNormal,
  OriginNotInterior,
  NonIntegralVertex,
  Unbounded,
  MalformedInput,
  // numerics
  SingularHessian,
  NoConvergence,
  IllConditionedFit,
  QuadratureNotConverged,
  DivergentIntegral,
  LevelMismatch,
};

std::string_view to_string(ErrorCode code);

/// True for the codes produced by polytope validation (CLI exit status 1).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace toricq
