#pragma once

#include <stdexcept>
#include <string>

namespace hullsight {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside its documented domain (negative probability, bad epoch...).
class ValueError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong order, e.g. backward before forward.
class StateError : public Error {
 public:
  using Error::Error;
};

// Inconsistent model / training configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be processed (empty data dir, non-finite loss...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace hullsight
