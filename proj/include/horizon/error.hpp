#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace horizon {

// Every failure the library reports carries one of these codes. The service
// layer maps them onto HTTP statuses and the CLI onto exit codes.
enum class ErrorCode {
  invalid_argument,
  duplicate_label,
  empty_frame,
  unknown_label,
  unknown_frame,
  unknown_node,
  invalid_mass,
  mass_sum_exceeded,
  empty_focal_set,
  frame_mismatch,
  open_world_input,
  invalid_rate,
  total_conflict,
  unreachable_frame,
  duplicate_relation,
  missing_pair,
  frame_too_large,
  resource_exhausted,
  insufficient_inputs,
  disabled_node,
  parse_error,
  validation_error,
  version_mismatch,
  replay_mismatch,
  cancelled,
  io_error,
  not_found,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::duplicate_label: return "duplicate_label";
    case ErrorCode::empty_frame: return "empty_frame";
    case ErrorCode::unknown_label: return "unknown_label";
    case ErrorCode::unknown_frame: return "unknown_frame";
    case ErrorCode::unknown_node: return "unknown_node";
    case ErrorCode::invalid_mass: return "invalid_mass";
    case ErrorCode::mass_sum_exceeded: return "mass_sum_exceeded";
    case ErrorCode::empty_focal_set: return "empty_focal_set";
    case ErrorCode::frame_mismatch: return "frame_mismatch";
    case ErrorCode::open_world_input: return "open_world_input";
    case ErrorCode::invalid_rate: return "invalid_rate";
    case ErrorCode::total_conflict: return "total_conflict";
    case ErrorCode::unreachable_frame: return "unreachable_frame";
    case ErrorCode::duplicate_relation: return "duplicate_relation";
    case ErrorCode::missing_pair: return "missing_pair";
    case ErrorCode::frame_too_large: return "frame_too_large";
    case ErrorCode::resource_exhausted: return "resource_exhausted";
    case ErrorCode::insufficient_inputs: return "insufficient_inputs";
    case ErrorCode::disabled_node: return "disabled_node";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::validation_error: return "validation_error";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::replay_mismatch: return "replay_mismatch";
    case ErrorCode::cancelled: return "cancelled";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::not_found: return "not_found";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace horizon
