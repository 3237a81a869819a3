#pragma once

#include <stdexcept>
#include <string>

namespace oed {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed expressions, configs, flags. Maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace oed
