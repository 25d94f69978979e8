#pragma once

#include <stdexcept>
#include <string>

namespace nomamec {

// Violated precondition on an operation argument.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// More users than BS pairs can host.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instance too large for an exhaustive oracle.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration; carries the dotted path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error("config error at " + path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace detail
}  // namespace nomamec
