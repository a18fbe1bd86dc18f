#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace giant {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

// Thrown when a loss or parameter goes non-finite during training.
// `term` names the offending loss component or parameter block.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& term, const std::string& message)
      : std::runtime_error(message + " [term: " + term + "]"), term_(term) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

// Bad input data or unusable configuration (maps to CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lookup of a user/item id that is not in the corpus (CLI exit code 3).
class MissingEntityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace giant
