#pragma once

#include <stdexcept>
#include <string>

namespace noisewarp {

enum class ErrorKind {
  kInvalidArgument,
  kFormat,
  kData,
  kIo,
};

/// Base of every exception thrown by the engine. The kind is stable and is
/// what the CLI maps onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

/// Malformed file structure (bad magic, unsupported version, bad header).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::kFormat, what) {}
};

/// Well-formed file carrying invalid content (NaN payload, checksum mismatch).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace noisewarp
