#include "fpe/error.hpp"

namespace fpe {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::PacketTooLarge: return "PacketTooLarge";
    case Errc::EmptyPacket: return "EmptyPacket";
    case Errc::MalformedFrame: return "MalformedFrame";
    case Errc::KeyInvalid: return "KeyInvalid";
    case Errc::AuthFailure: return "AuthFailure";
    case Errc::TooShort: return "TooShort";
    case Errc::ParseError: return "ParseError";
    case Errc::EmptyPayload: return "EmptyPayload";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::BadWeights: return "BadWeights";
    case Errc::TooLong: return "TooLong";
    case Errc::Empty: return "Empty";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::IoError: return "IoError";
    case Errc::BadMagic: return "BadMagic";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::TruncatedRecord: return "TruncatedRecord";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::InvalidHyperparams: return "InvalidHyperparams";
    case Errc::BadModel: return "BadModel";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyCounts: return "EmptyCounts";
    case Errc::UndefinedMetric: return "UndefinedMetric";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace fpe
