#pragma once

#include <stdexcept>
#include <string>

namespace infogain {

// Root of the library's exception hierarchy. The CLI maps ConfigError to exit
// code 2 and DataError (and its subclasses) to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Too few samples for the requested computation (including zero).
class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid option, hyperparameter, or estimator/modality combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed CSV input; carries a 1-based row and column location.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : DataError(what + " (row " + std::to_string(row) + ", column " +
                  std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Malformed or incompatible model document.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// Model document written by an incompatible format version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace infogain
