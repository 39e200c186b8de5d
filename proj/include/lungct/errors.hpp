#pragma once

#include <stdexcept>
#include <string>

namespace lungct {

// Error taxonomy used across the library. The CLI maps validation_error and
// format_error to exit code 1, everything else derived from error to 2.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or data that violates a documented invariant.
class validation_error : public error {
 public:
  using error::error;
};

// A file is syntactically readable but not in the expected format
// (missing fields, wrong dtype tag, unknown label...).
class format_error : public error {
 public:
  using error::error;
};

// A file's payload does not match its own header (truncation, size mismatch).
class corruption_error : public error {
 public:
  using error::error;
};

// Operation called in the wrong state (e.g. inference on unfrozen weights).
class state_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

// Raised when training diverges; carries the epoch where it happened.
class training_error : public error {
 public:
  training_error(const std::string& what, int epoch)
      : error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace lungct
