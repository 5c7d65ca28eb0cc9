#ifndef WECHARGE_ERROR_HPP
#define WECHARGE_ERROR_HPP

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace wecharge {

// Closed set of failure codes shared by every layer. The service maps each
// one to exactly one HTTP status; anything else surfaces as InternalError.
enum class ErrorCode {
  InvalidArgument,
  NoDcCapability,
  EmptyCandidateSet,
  ZeroWeightSum,
  ComponentOutOfRange,
  NoFeasibleStation,
  DuplicateId,
  InvalidStation,
  UnknownStation,
  SlotTaken,
  Unavailable,
  UnknownReservation,
  InvalidTransition,
  NotYetEnded,
  ParseError,
  FixtureMissing,
  InternalError,
};

inline constexpr std::array<std::pair<ErrorCode, std::string_view>, 17> kErrorCodeNames{{
    {ErrorCode::InvalidArgument, "InvalidArgument"},
    {ErrorCode::NoDcCapability, "NoDcCapability"},
    {ErrorCode::EmptyCandidateSet, "EmptyCandidateSet"},
    {ErrorCode::ZeroWeightSum, "ZeroWeightSum"},
    {ErrorCode::ComponentOutOfRange, "ComponentOutOfRange"},
    {ErrorCode::NoFeasibleStation, "NoFeasibleStation"},
    {ErrorCode::DuplicateId, "DuplicateId"},
    {ErrorCode::InvalidStation, "InvalidStation"},
    {ErrorCode::UnknownStation, "UnknownStation"},
    {ErrorCode::SlotTaken, "SlotTaken"},
    {ErrorCode::Unavailable, "Unavailable"},
    {ErrorCode::UnknownReservation, "UnknownReservation"},
    {ErrorCode::InvalidTransition, "InvalidTransition"},
    {ErrorCode::NotYetEnded, "NotYetEnded"},
    {ErrorCode::ParseError, "ParseError"},
    {ErrorCode::FixtureMissing, "FixtureMissing"},
    {ErrorCode::InternalError, "InternalError"},
}};

inline std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kErrorCodeNames) {
    if (c == code) return name;
  }
  return "InternalError";
}

inline std::optional<ErrorCode> error_code_from_string(std::string_view name) {
  for (const auto& [c, n] : kErrorCodeNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wecharge

#endif
