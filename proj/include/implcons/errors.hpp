#pragma once

#include <stdexcept>
#include <string>

namespace implcons {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed record: self-relation, cross-image relation, duplicate
/// proposition key, empty text, out-of-range value.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The same ordered proposition pair was annotated with two different kinds.
class ConflictError : public Error {
 public:
  using Error::Error;
};

class DanglingReferenceError : public Error {
 public:
  using Error::Error;
};

class MissingPredictionError : public Error {
 public:
  using Error::Error;
};

class EmptyGraphError : public Error {
 public:
  using Error::Error;
};

class NonBinaryAnswerError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class UnsupportedQuestionError : public Error {
 public:
  using Error::Error;
};

/// Input file could not be parsed. The message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace implcons
