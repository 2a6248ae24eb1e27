#pragma once

#include <stdexcept>
#include <string>

namespace qreadout {

/// Bad arguments or configuration supplied by the caller. Maps to CLI exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed, missing or inconsistent data. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class ChecksumMismatch : public DataError {
 public:
  using DataError::DataError;
};

class TruncatedFile : public DataError {
 public:
  using DataError::DataError;
};

/// Non-finite loss, collapsed mixture component and similar. Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qreadout
