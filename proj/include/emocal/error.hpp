#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace emocal {

enum class ErrorCode {
  ValidationFailed,
  NotFound,
  EmptySchedule,
  Infeasible,
  InstanceTooLarge,
  NoPeaksFound,
  TooFewPeaks,
  OutOfRange,
  SeriesTooShort,
  ShapeMismatch,
  EmptyInput,
  SingleClassDataset,
  MalformedEvent,
  ClassTooSmall,
  EmptyTable,
  ModelMissing,
  NoEvents,
  CorruptLog,
  ParseError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library carries a machine-readable code and
// optional structured details; the service maps these to {code, message, details}.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace emocal
