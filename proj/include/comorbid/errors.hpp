#pragma once

#include <stdexcept>
#include <string>

namespace comorbid {

// Error taxonomy mirrors the CLI exit codes:
// validation -> 1, I/O -> 2, numeric -> 3, capacity -> 4.

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace comorbid
