#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sensegraph {

enum class ErrorKind {
  input,      // malformed or inconsistent input, including shape mismatches
  numerical,  // NaN/Inf produced during iteration
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t node)
      : Error(ErrorKind::numerical, what), node_(node) {}

  /// Row index of the node whose update became non-finite.
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

}  // namespace sensegraph
