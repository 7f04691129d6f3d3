#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rhyme {

// Base of every error raised by the library. The CLI maps ValidationError
// subclasses to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input detected before any work starts (schemas, preconditions).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TranscriptionError : public Error {
 public:
  using Error::Error;
};

class UnknownWordError : public TranscriptionError {
 public:
  explicit UnknownWordError(std::vector<std::string> words);
  const std::vector<std::string>& words() const noexcept { return words_; }

 private:
  std::vector<std::string> words_;
};

// A feature table lacks a symbol (or modifier) used by a transcription.
class CoverageError : public Error {
 public:
  explicit CoverageError(std::string symbol);
  const std::string& symbol() const noexcept { return symbol_; }

 private:
  std::string symbol_;
};

class NoNucleusError : public Error {
 public:
  using Error::Error;
};

class CannotTrainError : public Error {
 public:
  using Error::Error;
};

class ScopeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CoverageMismatchError : public ValidationError {
 public:
  explicit CoverageMismatchError(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

class DegenerateDesignError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// LLM response could not be read as JSON at all.
class ResponseParseError : public Error {
 public:
  ResponseParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

// LLM response was JSON but not {"rhymes": [[string, ...], ...]}.
class ResponseShapeError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

}  // namespace rhyme
