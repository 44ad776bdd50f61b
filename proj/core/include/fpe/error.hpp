#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpe {

/// Error conditions raised by every module. Each throw site picks the
/// condition that names the violated contract; callers switch on code().
enum class Errc {
  // codec
  PacketTooLarge,
  EmptyPacket,
  MalformedFrame,
  KeyInvalid,
  AuthFailure,
  TooShort,
  // traffic
  ParseError,
  EmptyPayload,
  EmptyInput,
  BadWeights,
  // dataset
  TooLong,
  Empty,
  DegenerateSplit,
  IoError,
  BadMagic,
  CountMismatch,
  TruncatedRecord,
  // classifiers
  EmptyTrainingSet,
  InvalidHyperparams,
  BadModel,
  // metrics
  LengthMismatch,
  EmptyCounts,
  UndefinedMetric,
  // experiment
  InsufficientData,
  BadConfig,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace fpe
