// devroll - numerical development of curves on chart manifolds
//
// Shared vocabulary: Eigen aliases and the exception hierarchy used by every module.

#ifndef DEVROLL_CORE_HPP
#define DEVROLL_CORE_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace devroll {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Base of all engine errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed expression source. offset is the byte position of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Evaluation outside the domain of an operation (log of non-positive, pole, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid arguments to a geometric operation (wrong dimension, corner product, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A numerical procedure could not complete (singular metric, degenerate frame, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace devroll

#endif  // DEVROLL_CORE_HPP
