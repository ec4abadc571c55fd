#pragma once

#include <stdexcept>
#include <string>

namespace blockpath {

// Base for every domain failure. code() is the stable string carried by
// protocol error events.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define BLOCKPATH_DEFINE_ERROR(Name, code_str)                      \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& message) : Error(code_str, message) {} \
  }

BLOCKPATH_DEFINE_ERROR(ArgumentError, "argument_error");
BLOCKPATH_DEFINE_ERROR(BoundsError, "bounds_error");
BLOCKPATH_DEFINE_ERROR(RegistryError, "registry_error");
BLOCKPATH_DEFINE_ERROR(StateError, "state_error");
BLOCKPATH_DEFINE_ERROR(ConfigError, "config_error");
BLOCKPATH_DEFINE_ERROR(OracleError, "oracle_error");
BLOCKPATH_DEFINE_ERROR(ConstraintError, "constraint_error");
BLOCKPATH_DEFINE_ERROR(StalenessError, "stale_run");
BLOCKPATH_DEFINE_ERROR(GateError, "gate_locked");
BLOCKPATH_DEFINE_ERROR(IoError, "io_error");
BLOCKPATH_DEFINE_ERROR(NotFoundError, "not_found");
BLOCKPATH_DEFINE_ERROR(SessionError, "unknown_session");
BLOCKPATH_DEFINE_ERROR(ProtocolError, "protocol_error");

#undef BLOCKPATH_DEFINE_ERROR

// Parse failures carry the 1-based line of the offending input.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error("parse_error",
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace blockpath
