#pragma once

#include <stdexcept>
#include <string>

namespace ditras {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Problems with the data being processed (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigMismatchError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IndexError : public DataError {
 public:
  using DataError::DataError;
};

class InvalidTessellationError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateDistanceError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyRelevanceError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyUserError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyCorpusError : public DataError {
 public:
  using DataError::DataError;
};

class InvalidModelError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyDistributionError : public DataError {
 public:
  using DataError::DataError;
};

class IncomparableDistributionsError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientHistoryError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientPointsError : public DataError {
 public:
  using DataError::DataError;
};

class UndefinedSilhouetteError : public DataError {
 public:
  using DataError::DataError;
};

/// Malformed input file; carries the offending line when known.
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Failure inside agent generation, annotated with where it happened.
class GenerationError : public DataError {
 public:
  GenerationError(std::size_t agent, std::size_t slot, const std::string& what)
      : DataError("agent " + std::to_string(agent) + ", slot " + std::to_string(slot) + ": " + what),
        agent_(agent),
        slot_(slot) {}

  std::size_t agent() const noexcept { return agent_; }
  std::size_t slot() const noexcept { return slot_; }

 private:
  std::size_t agent_;
  std::size_t slot_;
};

}  // namespace ditras
