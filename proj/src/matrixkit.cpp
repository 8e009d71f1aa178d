#include "homctl/matrixkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace homctl {

namespace {

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double norm1(const Mat& m) {
  return m.size() ? m.cwiseAbs().colwise().sum().maxCoeff() : 0.0;
}

// Pade coefficients for degree 13 (Higham 2005); the lower-degree tables are
// the leading entries of the corresponding approximants.
constexpr double kB3[] = {120.0, 60.0, 12.0, 1.0};
constexpr double kB5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr double kB7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                          25200.0,    1512.0,    56.0,      1.0};
constexpr double kB9[] = {17643225600.0, 8821612800.0, 2075673600.0,
                          302702400.0,   30270240.0,   2162160.0,
                          110880.0,      3960.0,       90.0,
                          1.0};
constexpr double kB13[] = {64764752532480000.0,
                           32382376266240000.0,
                           7771770303897600.0,
                           1187353796428800.0,
                           129060195264000.0,
                           10559470521600.0,
                           670442572800.0,
                           33522128640.0,
                           1323241920.0,
                           40840800.0,
                           960960.0,
                           16380.0,
                           182.0,
                           1.0};

constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e+0;
constexpr double kTheta13 = 5.371920351148152e+0;

Mat pade_low(const Mat& A, const double* b, int m) {
  const Eigen::Index n = A.rows();
  const Mat I = Mat::Identity(n, n);
  const Mat A2 = A * A;
  Mat U = b[1] * I;
  Mat V = b[0] * I;
  Mat Ak = I;
  for (int k = 2; k <= m; k += 2) {
    Ak = Ak * A2;
    U += b[k + 1] * Ak;
    V += b[k] * Ak;
  }
  U = A * U;
  return (V - U).partialPivLu().solve(V + U);
}

Mat pade13(const Mat& A) {
  const double* b = kB13;
  const Eigen::Index n = A.rows();
  const Mat I = Mat::Identity(n, n);
  const Mat A2 = A * A;
  const Mat A4 = A2 * A2;
  const Mat A6 = A4 * A2;
  Mat U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
               b[5] * A4 + b[3] * A2 + b[1] * I);
  Mat V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 +
          b[2] * A2 + b[0] * I;
  return (V - U).partialPivLu().solve(V + U);
}

Mat nilpotent_series(const Mat& M) {
  const Eigen::Index n = M.rows();
  Mat result = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    term = term * M / static_cast<double>(k);
    if (max_abs(term) == 0.0) break;
    result += term;
  }
  return result;
}

}  // namespace

void require_square(const Mat& M, const char* what) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << M.rows()
       << "x" << M.cols();
    throw std::invalid_argument(os.str());
  }
}

SymMat::SymMat(const Mat& m) {
  require_square(m, "SymMat");
  if (!m.allFinite()) throw std::invalid_argument("SymMat: non-finite entry");
  const double scale = max_abs(m);
  const double resid = max_abs(m - m.transpose());
  if (resid > 1e-12 * scale) {
    std::ostringstream os;
    os << "SymMat: symmetry residual " << resid << " exceeds 1e-12 * "
       << scale;
    throw std::invalid_argument(os.str());
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMat SymMat::symmetrized(const Mat& m) {
  require_square(m, "SymMat::symmetrized");
  SymMat s;
  s.m_ = 0.5 * (m + m.transpose());
  return s;
}

bool is_nilpotent(const Mat& M, double rel_tol) {
  require_square(M, "is_nilpotent");
  const Eigen::Index n = M.rows();
  const double scale = norm1(M);
  if (scale == 0.0) return true;
  Mat P = M;
  for (Eigen::Index k = 1; k < n; ++k) P = P * M;
  return norm1(P) <= rel_tol * std::pow(scale, static_cast<double>(n));
}

Mat expm(const Mat& M) {
  require_square(M, "expm");
  if (!M.allFinite()) throw std::invalid_argument("expm: non-finite entry");
  const Eigen::Index n = M.rows();
  const double nrm = norm1(M);
  if (nrm == 0.0) return Mat::Identity(n, n);

  // Exact path. The power test is cheap next to Pade-13 for the sizes used.
  {
    Mat P = M;
    for (Eigen::Index k = 1; k < n; ++k) P = P * M;
    if (max_abs(P) == 0.0) return nilpotent_series(M);
  }

  if (nrm <= kTheta3) return pade_low(M, kB3, 3);
  if (nrm <= kTheta5) return pade_low(M, kB5, 5);
  if (nrm <= kTheta7) return pade_low(M, kB7, 7);
  if (nrm <= kTheta9) return pade_low(M, kB9, 9);

  int s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta13))));
  Mat R = pade13(M / std::ldexp(1.0, s));
  for (int i = 0; i < s; ++i) R = R * R;
  return R;
}

DiscretePair discretize_pair(const Mat& A, const Mat& B, double h) {
  require_square(A, "discretize_pair(A)");
  if (B.rows() != A.rows()) {
    std::ostringstream os;
    os << "discretize_pair: B has " << B.rows() << " rows, A is " << A.rows()
       << "x" << A.cols();
    throw std::invalid_argument(os.str());
  }
  if (!(h >= 0.0) || !std::isfinite(h))
    throw std::invalid_argument("discretize_pair: h must be finite and >= 0");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Mat big = Mat::Zero(n + m, n + m);
  big.topLeftCorner(n, n) = A * h;
  big.topRightCorner(n, m) = B * h;
  const Mat E = expm(big);
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

SymEig sym_eig(const SymMat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S.mat());
  if (es.info() != Eigen::Success)
    throw Error("sym_eig: eigen-decomposition did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

double lambda_min(const SymMat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double lambda_max(const SymMat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

Mat sqrtm_pd(const SymMat& S) {
  const SymEig e = sym_eig(S);
  const double lmin = e.values(0);
  if (!(lmin > 0.0)) {
    std::ostringstream os;
    os << "sqrtm_pd: matrix is not positive definite (lambda_min = " << lmin
       << ")";
    throw NotPositiveDefinite(os.str(), lmin);
  }
  const Mat R = e.vectors * e.values.cwiseSqrt().asDiagonal() *
                e.vectors.transpose();
  return 0.5 * (R + R.transpose());
}

SymMat jacobi_scaled(const SymMat& S) {
  const Vec d = S.mat().diagonal();
  if (!(d.minCoeff() > 0.0)) return S;
  const Vec r = d.cwiseSqrt().cwiseInverse();
  return SymMat::symmetrized(r.asDiagonal() * S.mat() * r.asDiagonal());
}

Mat real_eigenbasis(const Mat& M, double max_cond) {
  require_square(M, "real_eigenbasis");
  const Eigen::Index n = M.rows();
  Eigen::EigenSolver<Mat> es(M);
  if (es.info() != Eigen::Success) return Mat::Identity(n, n);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().imag().cwiseAbs().maxCoeff() > 1e-12 * scale) return Mat::Identity(n, n);
  Mat V = es.eigenvectors().real();
  for (Eigen::Index j = 0; j < n; ++j) V.col(j).normalize();
  const Vec sv = Eigen::JacobiSVD<Mat>(V).singularValues();
  if (!(sv(n - 1) > 0.0) || sv(0) / sv(n - 1) > max_cond) return Mat::Identity(n, n);
  return V;
}

SymMat graded_form(const SymMat& S, const Mat& V) {
  const Mat W = V.partialPivLu().solve(S.mat());
  return jacobi_scaled(SymMat::symmetrized(V.partialPivLu().solve(W.transpose())));
}

bool is_pd(const SymMat& S, double margin) {
  const SymEig e = sym_eig(S);
  if (margin < 0.0) {
    const double spec = std::max(std::abs(e.values(0)),
                                 std::abs(e.values(e.values.size() - 1)));
    margin = 1e-9 * spec;
  }
  return e.values(0) > margin;
}

double weighted_norm(const Vec& x, const SymMat& P) {
  // scaled so that states far beyond 1e154 do not overflow the quadratic form
  const double s = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  if (s == 0.0 || !std::isfinite(s)) return s;
  const Vec y = x / s;
  return s * std::sqrt(std::max(0.0, y.dot(P.mat() * y)));
}

double weighted_op_norm(const Mat& M, const SymMat& P) {
  // sup |Mx|_P / |x|_P = sqrt(lambda_max(P^{-1/2} M' P M P^{-1/2}))
  require_square(M, "weighted_op_norm");
  const SymEig e = sym_eig(P);
  const Mat Pih = e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() *
                  e.vectors.transpose();
  const Mat G = Pih * M.transpose() * P.mat() * M * Pih;
  return std::sqrt(std::max(0.0, lambda_max(SymMat::symmetrized(G))));
}

Mat kalman_matrix(const Mat& A, const Mat& B) {
  require_square(A, "kalman_matrix(A)");
  if (B.rows() != A.rows())
    throw std::invalid_argument("kalman_matrix: B row count mismatch");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Mat C(n, n * m);
  Mat blk = B;
  for (Eigen::Index i = 0; i < n; ++i) {
    C.middleCols(i * m, m) = blk;
    blk = A * blk;
  }
  return C;
}

int controllability_rank(const Mat& A, const Mat& B) {
  const Mat C = kalman_matrix(A, B);
  Eigen::JacobiSVD<Mat> svd(C);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-8 * sv(0)) ++r;
  return r;
}

double cond2(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  const Vec& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

Mat checked_inverse(const Mat& M, double max_cond, double* cond_out) {
  require_square(M, "checked_inverse");
  const double c = cond2(M);
  if (cond_out) *cond_out = c;
  if (!(c <= max_cond)) {
    std::ostringstream os;
    os << "matrix is numerically singular (cond = " << c << ")";
    throw SingularMatrix(os.str(), c);
  }
  return M.partialPivLu().inverse();
}

}  // namespace homctl
