#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace marx {

enum class ErrorCode {
  InvalidArgument,
  InvalidAction,
  IncompatibleState,
  NonMonotone,
  NoCompletePath,
  MalformedFile,
  UnsupportedVersion,
  ParseError,
  UnknownTask,
  UnknownAgent,
  InvalidQuery,
  EmptySampleMap,
  TooManyVariables,
  RepairDiverged,
  Busy,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library. `module()` names the component
/// that raised it so the CLI and HTTP layers can report provenance.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message,
        std::optional<std::size_t> offset = std::nullopt)
      : std::runtime_error(message),
        code_(code),
        module_(std::move(module)),
        offset_(offset) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  /// Byte offset into the offending input, for parse-style errors.
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::optional<std::size_t> offset_;
};

}  // namespace marx
