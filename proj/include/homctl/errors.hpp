#pragma once

#include <stdexcept>
#include <string>

namespace homctl {

/// Base class for domain failures (infeasible synthesis, broken invariants,
/// numerically singular data). Shape and argument errors use
/// std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class InvalidDilation : public Error {
 public:
  using Error::Error;
};

class Uncontrollable : public Error {
 public:
  Uncontrollable(const std::string& what, int rank, int required)
      : Error(what), rank_(rank), required_(required) {}
  int rank() const noexcept { return rank_; }
  int required() const noexcept { return required_; }

 private:
  int rank_;
  int required_;
};

class LmiInfeasible : public Error {
 public:
  LmiInfeasible(const std::string& what, int iterations, double margin_x,
                double margin_gx)
      : Error(what),
        iterations_(iterations),
        margin_x_(margin_x),
        margin_gx_(margin_gx) {}
  int iterations() const noexcept { return iterations_; }
  double margin_x() const noexcept { return margin_x_; }
  double margin_gx() const noexcept { return margin_gx_; }

 private:
  int iterations_;
  double margin_x_;
  double margin_gx_;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class StructureError : public Error {
 public:
  StructureError(const std::string& what, int block_row, int block_col)
      : Error(what), block_row_(block_row), block_col_(block_col) {}
  /// 1-based block indices of the offending block.
  int block_row() const noexcept { return block_row_; }
  int block_col() const noexcept { return block_col_; }

 private:
  int block_row_;
  int block_col_;
};

}  // namespace homctl
