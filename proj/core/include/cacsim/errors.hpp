#pragma once

#include <stdexcept>
#include <string>

namespace cacsim {

/// Bad argument to an operation (non-positive rate, length mismatch, ...).
class InvalidParameter : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A configured resource cap was exceeded (e.g. CTMC state-space size).
class ResourceLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to reach its required tolerance.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Training diverged (loss became non-finite). Carries the offending epoch.
class TrainingError : public std::runtime_error {
public:
  TrainingError(const std::string& what, int epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

private:
  int epoch_;
};

/// Malformed configuration or data file; message names file, line and key.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure (unwritable path, missing file at emit time).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace cacsim
