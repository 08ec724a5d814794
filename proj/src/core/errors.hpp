#pragma once

#include <stdexcept>
#include <string>

namespace sida {

enum class ErrorCode {
  invalid_argument = 1,
  io = 2,
  parse = 3,
  schema = 4,
  numeric = 5,
  internal = 6,
};

/// Base error type; carries a stable code for the C API boundary.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct InvalidArgumentError : Error {
  explicit InvalidArgumentError(const std::string& m) : Error(ErrorCode::invalid_argument, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCode::io, m) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(ErrorCode::parse, m) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& m) : Error(ErrorCode::schema, m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorCode::numeric, m) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgumentError(message);
}

}  // namespace sida
