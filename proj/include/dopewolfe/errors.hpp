#pragma once

#include <stdexcept>
#include <string>

namespace dopewolfe {

/// Invalid arguments, malformed inputs, broken preconditions.
class validation_error : public std::invalid_argument {
 public:
  explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A requested construction does not fit the 128-bit index space.
class capacity_error : public validation_error {
 public:
  explicit capacity_error(const std::string& what) : validation_error(what) {}
};

/// Numerical failure: non-finite values, failed factorizations.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

class singular_matrix_error : public numerical_error {
 public:
  explicit singular_matrix_error(const std::string& what) : numerical_error(what) {}
};

/// Filesystem failures; carries the offending path in the message.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dopewolfe
