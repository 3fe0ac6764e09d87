#pragma once

#include <stdexcept>
#include <string>

namespace wellopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A horizontal or inclined bore leaves the reservoir box.
class PathExitsGrid : public Error {
 public:
  using Error::Error;
};

/// Reserved for models with inactive cells.
class PathHitsInactiveCell : public Error {
 public:
  using Error::Error;
};

/// Peaceman equivalent radius does not exceed the wellbore radius.
class DegenerateIndex : public Error {
 public:
  using Error::Error;
};

/// Linear solve failed or the CFL-limited step count exploded.
class SolverFailed : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

class NoValidPointFound : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment document. `path()` is the dotted location of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace wellopt
