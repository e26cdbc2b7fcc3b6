#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hdd {

// Precondition violations: bad shapes, out-of-range indices, bad parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteValue : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class ParseErrorKind { kBadMagic, kVersionMismatch, kTruncated, kNonFinite, kMalformed, kIo };

const char* to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int last_finite_epoch, const std::string& what)
      : std::runtime_error(what), last_finite_epoch_(last_finite_epoch) {}
  // -1 when the very first epoch already diverged.
  int last_finite_epoch() const noexcept { return last_finite_epoch_; }

 private:
  int last_finite_epoch_;
};

class SamplingFailure : public std::runtime_error {
 public:
  SamplingFailure(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class DivisionByZero : public std::domain_error {
 public:
  DivisionByZero(std::size_t row, std::size_t col, const std::string& what)
      : std::domain_error(what), row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_, col_;
};

class DegenerateField : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace hdd
