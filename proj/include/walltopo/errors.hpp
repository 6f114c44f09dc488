#pragma once

#include <stdexcept>
#include <string>

namespace walltopo {

/// Bad user input: config values, array sizes, file contents.
/// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Empty constraint set: the volume target cannot be met within the bounds.
/// The CLI maps this (and other runtime aborts) to exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace walltopo
