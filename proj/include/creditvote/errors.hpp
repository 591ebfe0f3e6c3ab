#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace creditvote {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input files that do not match their schema, or unreadable/unwritable
// paths (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

// Anything that prevents a model from being fitted (CLI exit code 4).
class EstimationError : public Error {
 public:
  using Error::Error;
};

class RankError : public EstimationError {
 public:
  RankError(const std::string& what, std::vector<std::string> columns)
      : EstimationError(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class EmptySampleError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class ConvergenceError : public EstimationError {
 public:
  ConvergenceError(const std::string& what, double achieved, int sweeps)
      : EstimationError(what), achieved_(achieved), sweeps_(sweeps) {}
  double achieved() const noexcept { return achieved_; }
  int sweeps() const noexcept { return sweeps_; }

 private:
  double achieved_;
  int sweeps_;
};

class TooFewClustersError : public EstimationError {
 public:
  TooFewClustersError(const std::string& what, std::size_t clusters)
      : EstimationError(what), clusters_(clusters) {}
  std::size_t clusters() const noexcept { return clusters_; }

 private:
  std::size_t clusters_;
};

// Underidentified IV model or rank-deficient first stage.
class IdentificationError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace creditvote
