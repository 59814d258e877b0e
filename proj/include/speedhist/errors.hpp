#pragma once

#include <stdexcept>
#include <string>

namespace speedhist {

// Malformed graph structure (dangling references, unknown ids).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed an argument outside the operation's domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Not enough observations to build a histogram.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration that cannot be trained or evaluated (e.g. no labels).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File missing or unparsable. The message always names the file.
class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& file, const std::string& what)
      : std::runtime_error(file + ": " + what), file_(file) {}
  [[nodiscard]] const std::string& file() const { return file_; }

 private:
  std::string file_;
};

}  // namespace speedhist
