#pragma once

#include <stdexcept>
#include <string>

namespace raresage {

enum class ErrorKind {
  io,
  format,
  validation,
  config,
  state,
  training,
  degenerate,
  undefined,
  stratification,
};

const char* to_string(ErrorKind kind);

// Base of everything the library throws. `kind()` drives the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorKind::io, m) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& m) : Error(ErrorKind::format, m) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& m) : Error(ErrorKind::validation, m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& m) : Error(ErrorKind::state, m) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& m) : Error(ErrorKind::training, m) {}
};

/// Class too small for a neighbour density (fewer than two members).
class DegenerateClassError : public Error {
 public:
  explicit DegenerateClassError(const std::string& m) : Error(ErrorKind::degenerate, m) {}
};

/// A quantity with no defined value: zero-norm cosine, all-zero Gini input.
class UndefinedError : public Error {
 public:
  explicit UndefinedError(const std::string& m) : Error(ErrorKind::undefined, m) {}
};

class StratificationError : public Error {
 public:
  explicit StratificationError(const std::string& m) : Error(ErrorKind::stratification, m) {}
};

}  // namespace raresage
