#pragma once

#include <stdexcept>
#include <string>

namespace evdfa {

// Base of all library errors. The three direct subclasses map onto the
// CLI exit codes: UsageError -> 1, DataError -> 2, DegenerateError -> 3.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration supplied by the caller.
class UsageError : public Error {
  public:
    using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
  public:
    using Error::Error;
};

// Analysis cannot produce a meaningful result on this input.
class DegenerateError : public Error {
  public:
    using Error::Error;
};

class MalformedRecordError : public DataError {
  public:
    using DataError::DataError;
};

class MalformedPolarityError : public MalformedRecordError {
  public:
    using MalformedRecordError::MalformedRecordError;
};

class OutOfBoundsError : public DataError {
  public:
    using DataError::DataError;
};

class UnsortedInputError : public DataError {
  public:
    using DataError::DataError;
};

class LengthMismatchError : public DataError {
  public:
    using DataError::DataError;
};

class GeometryMismatchError : public DataError {
  public:
    using DataError::DataError;
};

class TrajectoryOutOfBoundsError : public UsageError {
  public:
    using UsageError::UsageError;
};

class TooFewEventsError : public DegenerateError {
  public:
    using DegenerateError::DegenerateError;
};

class SeriesTooShortError : public DegenerateError {
  public:
    using DegenerateError::DegenerateError;
};

class DegenerateSeriesError : public DegenerateError {
  public:
    using DegenerateError::DegenerateError;
};

} // namespace evdfa
