#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "homctl/errors.hpp"

namespace homctl {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

/// Symmetric matrix. Construction checks the symmetry residual against
/// 1e-12 * max|entry| and then symmetrizes exactly.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m);

  const Mat& mat() const noexcept { return m_; }
  operator const Mat&() const noexcept { return m_; }
  Eigen::Index rows() const noexcept { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// Symmetrizes without checking; for results of congruence products where
  /// roundoff makes the residual exceed the strict construction tolerance.
  static SymMat symmetrized(const Mat& m);

 private:
  Mat m_;
};

struct SymEig {
  Vec values;   // ascending
  Mat vectors;  // orthonormal columns
};

struct DiscretePair {
  Mat Ah;
  Mat Bh;
};

/// Matrix exponential. Nilpotent inputs (M^n == 0) take the finite series;
/// everything else goes through Pade-13 scaling and squaring.
Mat expm(const Mat& M);

/// True iff M^n vanishes (relative to the size of M).
bool is_nilpotent(const Mat& M, double rel_tol = 1e-13);

/// A_h = e^{hA}, B_h = int_0^h e^{sA} B ds, both from one exponential of
/// the augmented block [[A, B], [0, 0]] * h.
DiscretePair discretize_pair(const Mat& A, const Mat& B, double h);

SymEig sym_eig(const SymMat& S);
double lambda_min(const SymMat& S);
double lambda_max(const SymMat& S);

/// Symmetric square root of a positive definite matrix.
Mat sqrtm_pd(const SymMat& S);

/// D S D with D = diag(S)^{-1/2}: unit diagonal, same inertia. Graded
/// matrices keep their definiteness digits here. S is returned unchanged
/// when some diagonal entry is not positive.
SymMat jacobi_scaled(const SymMat& S);

/// Real eigenvector basis of M with unit columns, or the identity when M has
/// complex eigenvalues or the basis has condition number above max_cond.
Mat real_eigenbasis(const Mat& M, double max_cond = 1e8);

/// jacobi_scaled(V^-1 S V^-T): definiteness in the coordinates V.
SymMat graded_form(const SymMat& S, const Mat& V);

/// lambda_min(S) > margin. Negative margin selects the default
/// 1e-9 * ||S||_2.
bool is_pd(const SymMat& S, double margin = -1.0);

/// Operator norm induced by ||x||_P = sqrt(x' P x).
double weighted_op_norm(const Mat& M, const SymMat& P);

/// ||x||_P
double weighted_norm(const Vec& x, const SymMat& P);

/// [B, AB, ..., A^{n-1}B]
Mat kalman_matrix(const Mat& A, const Mat& B);

/// Rank of the Kalman matrix with threshold 1e-8 * sigma_max.
int controllability_rank(const Mat& A, const Mat& B);

/// Inverse with a 2-norm condition check; throws SingularMatrix above
/// max_cond.
Mat checked_inverse(const Mat& M, double max_cond, double* cond_out = nullptr);

double cond2(const Mat& M);

void require_square(const Mat& M, const char* what);

}  // namespace homctl
