#pragma once

#include <stdexcept>
#include <string>

namespace heisen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments: wrong dimension, out-of-range query, invalid parameters.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A requested accuracy cannot be met within the configured caps.
class ToleranceError : public Error {
 public:
  using Error::Error;
};

}  // namespace heisen
