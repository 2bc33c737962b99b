#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tunisent {

// Base of all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: missing files, malformed rows, invalid specs/configs.
// The CLI maps these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

// Missing environment pieces (embedding files, model checkpoints).
// The CLI maps these to exit code 3.
class ProviderUnavailable : public Error {
 public:
  using Error::Error;
};

class MissingFile : public InputError {
 public:
  explicit MissingFile(const std::string& path)
      : InputError("file not found: " + path) {}
};

class EmptyDataset : public InputError {
 public:
  explicit EmptyDataset(const std::string& what) : InputError(what) {}
};

// Malformed rows are rejected, never silently dropped. Carries the first
// offending rows (1-based record numbers, header excluded) with reasons.
class SchemaError : public InputError {
 public:
  using RowIssue = std::pair<std::size_t, std::string>;

  SchemaError(std::string summary, std::vector<RowIssue> rows)
      : InputError(format(summary, rows)), rows_(std::move(rows)) {}

  const std::vector<RowIssue>& rows() const { return rows_; }

 private:
  static std::string format(const std::string& summary,
                            const std::vector<RowIssue>& rows) {
    std::string msg = summary;
    for (const auto& [row, reason] : rows) {
      msg += "\n  row " + std::to_string(row) + ": " + reason;
    }
    return msg;
  }

  std::vector<RowIssue> rows_;
};

class InvalidSpec : public InputError {
 public:
  using InputError::InputError;
};

class InvalidConfig : public InputError {
 public:
  using InputError::InputError;
};

class InvalidHyperparameter : public InputError {
 public:
  using InputError::InputError;
};

class EmptyCorpus : public InputError {
 public:
  using InputError::InputError;
};

class FormatError : public InputError {
 public:
  FormatError(const std::string& what, std::size_t byte_offset)
      : InputError(what + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class LengthMismatch : public InputError {
 public:
  using InputError::InputError;
};

class EmptyInput : public InputError {
 public:
  using InputError::InputError;
};

class EmptyTestSplit : public InputError {
 public:
  using InputError::InputError;
};

// Training loss became non-finite; aborts the run with a diagnostic.
class Divergence : public Error {
 public:
  using Error::Error;
};

}  // namespace tunisent
