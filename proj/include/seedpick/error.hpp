#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seedpick {

enum class ErrorKind {
  not_found,
  io,
  format,
  corruption,
  validation,
  refusal,
  usage,
};

std::string_view kind_name(ErrorKind kind);

/// Exception carrying a machine-readable kind; the CLI maps it to exit codes
/// and error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace seedpick
