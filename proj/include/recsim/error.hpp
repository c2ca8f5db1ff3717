#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace recsim {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input row or document. Carries the 1-based row (line) number and the
/// offending field so callers can point at the exact spot in the file.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t row, std::string field, const std::string& what)
      : Error(source + ":" + std::to_string(row) + ": field '" + field + "': " + what),
        source_(std::move(source)),
        row_(row),
        field_(std::move(field)) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string source_;
  std::size_t row_;
  std::string field_;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(std::string id)
      : Error("duplicate item_id '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class UnknownItemError : public Error {
 public:
  explicit UnknownItemError(std::string id)
      : Error("unknown item_id '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

/// Invalid configuration value; `field()` names the config key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A model completion that could not be turned into a valid structured answer.
class SimulatorOutputError : public Error {
 public:
  SimulatorOutputError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// Transport-level failure talking to a chat-completions endpoint.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, int status = 0) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace recsim
