#include "homctl/synthesis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace homctl {

namespace {

double fro(const Mat& m) { return m.norm(); }

}  // namespace

void validate_plant(const Plant& p) {
  require_square(p.A, "plant A");
  if (p.B.rows() != p.A.rows() || p.B.cols() == 0) {
    std::ostringstream os;
    os << "plant B is " << p.B.rows() << "x" << p.B.cols() << ", A is "
       << p.A.rows() << "x" << p.A.cols();
    throw std::invalid_argument(os.str());
  }
  if (!p.A.allFinite() || !p.B.allFinite())
    throw std::invalid_argument("plant matrices contain non-finite entries");
}

int controllability_index(const Plant& p) {
  validate_plant(p);
  const int n = static_cast<int>(p.n());
  const int rank = controllability_rank(p.A, p.B);
  if (rank < n) {
    std::ostringstream os;
    os << "pair {A, B} is not controllable: Kalman rank " << rank << " < " << n;
    throw Uncontrollable(os.str(), rank, n);
  }
  const Mat C = kalman_matrix(p.A, p.B);
  const Eigen::Index m = p.m();
  for (int k = 1; k <= n; ++k) {
    Eigen::JacobiSVD<Mat> svd(C.leftCols(k * m));
    const Vec& sv = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-8 * sv(0)) ++r;
    if (r == n) return k;
  }
  return n;
}

GeneratorSolution solve_G0_Y0(const Mat& A, const Mat& B) {
  const Plant plant{A, B};
  controllability_index(plant);
  const Eigen::Index n = A.rows(), m = B.cols();
  const Mat I = Mat::Identity(n, n);
  // Column-major vec: vec(AG) = (I kron A) vec G, vec(GA) = (A' kron I) vec G,
  // vec(BY) = (I kron B) vec Y, vec(GB) = (B' kron I) vec G.
  auto kron = [](const Mat& X, const Mat& Y) {
    Mat K(X.rows() * Y.rows(), X.cols() * Y.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < X.cols(); ++j)
        K.block(i * Y.rows(), j * Y.cols(), Y.rows(), Y.cols()) = X(i, j) * Y;
    return K;
  };
  Mat M = Mat::Zero(n * n + n * m, n * n + m * n);
  M.topLeftCorner(n * n, n * n) = kron(I, A) - kron(A.transpose(), I);
  M.topRightCorner(n * n, m * n) = kron(I, B);
  M.bottomLeftCorner(n * m, n * n) = kron(B.transpose(), I);
  Vec rhs = Vec::Zero(n * n + n * m);
  rhs.head(n * n) = Eigen::Map<const Vec>(A.data(), n * n);

  Eigen::CompleteOrthogonalDecomposition<Mat> cod(M);
  const Vec sol = cod.solve(rhs);
  GeneratorSolution g;
  g.G0 = Eigen::Map<const Mat>(sol.data(), n, n);
  g.Y0 = Eigen::Map<const Mat>(sol.data() + n * n, m, n);
  // Drop roundoff-level entries so structurally zero entries are exact zeros
  // (a diagonal G0 then yields a diagonal dilation generator).
  const double scale = std::max(g.G0.cwiseAbs().maxCoeff(), g.Y0.cwiseAbs().maxCoeff());
  g.G0 = g.G0.unaryExpr([&](double v) { return std::abs(v) < 1e-13 * scale ? 0.0 : v; });
  g.Y0 = g.Y0.unaryExpr([&](double v) { return std::abs(v) < 1e-13 * scale ? 0.0 : v; });

  const double res = fro(A * g.G0 - g.G0 * A + B * g.Y0 - A) + fro(g.G0 * B);
  if (res > 1e-9 * std::max(1.0, fro(A))) {
    std::ostringstream os;
    os << "generator equation has no solution (residual " << res << ")";
    throw Error(os.str());
  }
  // With nilpotent A and a single input the solution has Y0 = 0.
  if (m == 1 && is_nilpotent(A) && fro(g.Y0) > 1e-9 * std::max(1.0, fro(A))) {
    std::ostringstream os;
    os << "generator equation: expected Y0 = 0 for a nilpotent single-input "
          "plant, got |Y0| = "
       << fro(g.Y0);
    throw InvariantViolation(os.str());
  }
  return g;
}

Mat make_Gd(const Mat& G0, double mu, int n_tilde) {
  require_square(G0, "make_Gd");
  if (n_tilde < 1) throw std::invalid_argument("make_Gd: controllability index < 1");
  if (!std::isfinite(mu) || mu == 0.0)
    throw std::invalid_argument("make_Gd: mu must be finite and nonzero");
  const double hi = 1.0 / static_cast<double>(n_tilde);
  if (mu < -1.0 || mu > hi) {
    std::ostringstream os;
    os << "make_Gd: mu = " << mu << " outside [-1, " << hi << "]";
    throw std::invalid_argument(os.str());
  }
  const Mat Gd = Mat::Identity(G0.rows(), G0.cols()) + mu * G0;
  Eigen::EigenSolver<Mat> es(Gd, false);
  const double re_min = es.eigenvalues().real().minCoeff();
  if (!(re_min > 0.0)) {
    std::ostringstream os;
    os << "make_Gd: I + mu G0 is not anti-Hurwitz (min Re = " << re_min << ")";
    throw InvalidDilation(os.str());
  }
  return Gd;
}

ControllerDesign assemble_design(const Plant& plant, double mu, double rho,
                                 const Mat& G0, const Mat& Y0, const Mat& Gd,
                                 const SymMat& X, const Mat& Y) {
  validate_plant(plant);
  const Eigen::Index n = plant.n(), m = plant.m();
  if (G0.rows() != n || G0.cols() != n || Gd.rows() != n || Gd.cols() != n ||
      X.rows() != n || Y0.rows() != m || Y0.cols() != n || Y.rows() != m ||
      Y.cols() != n)
    throw std::invalid_argument("assemble_design: inconsistent dimensions");
  ControllerDesign d;
  d.plant = plant;
  d.mu = mu;
  d.rho = rho;
  d.G0 = G0;
  d.Y0 = Y0;
  d.Gd = Gd;
  d.X = X;
  d.Y = Y;
  const Mat I = Mat::Identity(n, n);
  d.K0 = Y0 * checked_inverse(G0 - I, 1e12);
  const Eigen::LLT<Mat> llt(X.mat());
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("design X is not positive definite", lambda_min(X));
  const Mat Xinv = llt.solve(I);
  d.P = SymMat::symmetrized(Xinv);
  d.K = Y * Xinv;
  d.dilation = DilationSpec{Gd, mu, d.P};
  return d;
}

ControllerDesign build_controller(const Plant& plant, double mu, double rho,
                                  const LmiOptions& opt) {
  validate_plant(plant);
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("build_controller: rho must be positive");
  const int nt = controllability_index(plant);
  const GeneratorSolution g = solve_G0_Y0(plant.A, plant.B);
  const Mat Gd = make_Gd(g.G0, mu, nt);
  const Mat I = Mat::Identity(plant.n(), plant.n());
  const Mat K0 = g.Y0 * checked_inverse(g.G0 - I, 1e12);
  const Mat A0 = plant.A + plant.B * K0;
  const LmiSolution s = solve_gain_lmi(A0, plant.B, Gd, rho, opt);
  ControllerDesign d = assemble_design(plant, mu, rho, g.G0, g.Y0, Gd, s.X, s.Y);
  d.n_tilde = nt;
  d.diagnostics = s.diagnostics;
  require_invariants(d);
  return d;
}

InvariantReport check_invariants(const ControllerDesign& d) {
  InvariantReport r;
  const Mat& A = d.plant.A;
  const Mat& B = d.plant.B;
  const Eigen::Index n = A.rows();
  const Mat I = Mat::Identity(n, n);
  const Mat A0 = A + B * d.K0;
  const Mat& X = d.X.mat();
  const double sa = std::max(1.0, fro(A));

  r.generator_residual = fro(A * d.G0 - d.G0 * A + B * d.Y0 - A);
  r.g0b_residual = fro(d.G0 * B);
  r.homogeneity_residual = fro(A0 * d.Gd - (d.Gd + d.mu * I) * A0);
  r.gdb_residual = fro(d.Gd * B - B);
  const Mat gx = d.Gd * X + X * d.Gd.transpose();
  const Mat eq = A0 * X + X * A0.transpose() + B * d.Y + d.Y.transpose() * B.transpose() +
                 d.rho * gx;
  r.lmi_residual = fro(eq) / fro(X);
  const Mat Xinv = X.inverse();
  r.gain_residual =
      fro(d.K - d.Y * Xinv) / std::max(1.0, fro(d.K)) +
      fro(d.K0 - d.Y0 * (d.G0 - I).inverse()) / std::max(1.0, fro(d.K0));
  r.lambda_min_x = lambda_min(d.X);
  r.lambda_min_gx = lambda_min(SymMat::symmetrized(gx));

  auto fail = [&](const std::string& why) {
    if (r.failure.empty()) r.failure = why;
  };
  if (r.generator_residual > 1e-9 * sa) fail("generator equation residual");
  if (r.g0b_residual > 1e-9 * sa) fail("G0 B residual");
  if (r.homogeneity_residual > 1e-9 * sa) fail("homogeneity relation A0 Gd = (Gd + mu I) A0");
  if (r.gdb_residual > 1e-9) fail("Gd B = B");
  if (r.lmi_residual > 1e-8) fail("gain equality residual");
  if (r.gain_residual > 1e-9) fail("gain formulas K = Y X^-1, K0 = Y0 (G0 - I)^-1");
  // Large rho |mu| n grades X over many decades along the eigenvectors of Gd;
  // definiteness is judged on the unit-diagonal form in that basis.
  const Mat V = real_eigenbasis(d.Gd);
  if (!is_pd(graded_form(d.X, V))) fail("X not positive definite");
  if (!is_pd(graded_form(SymMat::symmetrized(gx), V)))
    fail("Gd X + X Gd' not positive definite");

  if (r.lambda_min_x > 0.0) {
    const Mat Ph = sqrtm_pd(d.P);
    const Mat At = A0 + B * d.K + d.rho * d.Gd;
    const Mat S = Ph * At * Ph.inverse();
    r.skew_residual = fro(S + S.transpose()) / std::max(1.0, fro(S));
    if (r.skew_residual > 1e-8) fail("rotation identity (skew residual)");
  }
  r.ok = r.failure.empty();
  return r;
}

void require_invariants(const ControllerDesign& d) {
  const InvariantReport r = check_invariants(d);
  if (!r.ok) throw InvariantViolation("design invariant violated: " + r.failure);
}

Vec eval_control(const ControllerDesign& d, const Vec& x) {
  const double r = hom_norm(d.dilation, x);
  if (r == 0.0) return Vec::Zero(d.plant.m());
  const Mat dm = dilation_at(d.dilation, -std::log(r));
  return d.K0 * x + std::pow(r, 1.0 + d.mu) * (d.K * (dm * x));
}

double lyapunov_decay_residual(const ControllerDesign& d, const Vec& x) {
  const double r = hom_norm(d.dilation, x);
  if (r == 0.0)
    throw std::invalid_argument("lyapunov_decay_residual: undefined at the origin");
  const RowVec g = hom_norm_gradient(d.dilation, x);
  const Vec f = d.plant.A * x + d.plant.B * eval_control(d, x);
  return std::abs(g.dot(f) + d.rho * std::pow(r, 1.0 + d.mu));
}

}  // namespace homctl
