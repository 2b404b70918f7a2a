#pragma once

#include <stdexcept>
#include <string>

namespace tama {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, missing credentials or a violated precondition on
/// user-supplied settings. Maps to exit code 2 in the CLI.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a documented contract (bad file, ragged rows,
/// overlapping injections, out-of-range intervals).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text data with an associated 1-based line number.
class IngestError : public ValidationError {
 public:
  IngestError(const std::string& path, std::size_t line, const std::string& what)
      : ValidationError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A model response that could not be interpreted. Keeps the raw text.
class ResponseParseError : public Error {
 public:
  ResponseParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}

  [[nodiscard]] const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// Failure talking to a chat backend.
class GatewayError : public Error {
 public:
  GatewayError(const std::string& what, bool transient = false, int status = 0)
      : Error(what), transient_(transient), status_(status) {}

  [[nodiscard]] bool transient() const noexcept { return transient_; }
  [[nodiscard]] int status() const noexcept { return status_; }

 private:
  bool transient_;
  int status_;
};

/// Strict replay found no cached response. Always fatal for a run.
class ReplayMissError : public GatewayError {
 public:
  explicit ReplayMissError(const std::string& key)
      : GatewayError("replay miss for cache key " + key), key_(key) {}

  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace tama
