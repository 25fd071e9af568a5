#pragma once

#include <stdexcept>

namespace rfcvnn {

/// Bad input data: unreadable or malformed files, short recordings, missing devices.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training could not proceed (non-finite loss, failed split).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid command-line or configuration request.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rfcvnn
