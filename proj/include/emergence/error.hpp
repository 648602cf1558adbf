#pragma once

#include <stdexcept>
#include <utility>
#include <string>
#include <string_view>

namespace emergence {

// Numeric values are part of the C ABI (see emergence.h); append only.
enum class ErrorCode : int {
  Ok = 0,
  NonSquare = 1,
  NegativeEntry = 2,
  RowSumOutOfTolerance = 3,
  DimensionMismatch = 4,
  NotIrreducible = 5,
  NotConverged = 6,
  InvalidDistribution = 7,
  InvalidLens = 8,
  InvalidPrototype = 9,
  TauZero = 10,
  NotARefinement = 11,
  ExplosionCap = 12,
  ShapeMismatch = 13,
  NoCommonStationary = 14,
  InvalidProtocol = 15,
  RevViolation = 16,
  EdgeMissing = 17,
  RowStarved = 18,
  NotReversible = 19,
  BudgetExceeded = 20,
  BadWindow = 21,
  InvalidSchedule = 22,
  InvalidArgument = 23,
  ParseError = 24,
  SchemaError = 25,
  Internal = 26,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Exception carrying a stable error code and the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message)
      : std::runtime_error(message), code_(code), module_(std::move(module)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

[[noreturn]] void raise(ErrorCode code, std::string_view module, const std::string& message);

}  // namespace emergence
