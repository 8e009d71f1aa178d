#pragma once

#include <string>

#include "homctl/dilation.hpp"
#include "homctl/matrixkit.hpp"

namespace homctl {

struct Plant {
  Mat A;
  Mat B;
  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
};

void validate_plant(const Plant& p);

/// Smallest k with rank [B, AB, ..., A^{k-1}B] = n. Throws Uncontrollable.
int controllability_index(const Plant& p);

struct GeneratorSolution {
  Mat G0;
  Mat Y0;
};

/// Least-norm solution of A G0 - G0 A + B Y0 = A, G0 B = 0.
GeneratorSolution solve_G0_Y0(const Mat& A, const Mat& B);

/// Gd = I + mu G0 with mu in [-1, 1/n_tilde], mu != 0.
Mat make_Gd(const Mat& G0, double mu, int n_tilde);

struct LmiOptions {
  double eps = 1e-6;
  int max_iterations = 50000;
  bool center = true;  // analytic-center refinement after feasibility
  int max_newton = 2000;
  // Rates above this are solved here first and carried over by the dilation;
  // 0 solves at the requested rate directly.
  double reference_rate = 0.1;
};

struct LmiDiagnostics {
  int projection_iterations = 0;
  int newton_iterations = 0;
  int free_dimension = 0;  // dimension of the normalized solution set
  double equality_residual = 0.0;
  double margin_x = 0.0;   // lambda_min(X)
  double margin_gx = 0.0;  // lambda_min(Gd X + X Gd')
};

struct LmiSolution {
  SymMat X;
  Mat Y;
  LmiDiagnostics diagnostics;
};

/// Finds X = X' > 0, Y with
///   A0 X + X A0' + B Y + Y' B' + rho (Gd X + X Gd') = 0,  Gd X + X Gd' > 0,
/// normalized to trace(X) = n. Dykstra alternating projections give a
/// feasible point; damped Newton then moves it to the analytic center of
/// {X > 0, Gd X + X Gd' > 0} on the normalized solution set. When
/// A0 Gd - Gd A0 = mu A0 and Gd B = B the feasible point is found at
/// opt.reference_rate and carried to rho along the dilation.
LmiSolution solve_gain_lmi(const Mat& A0, const Mat& B, const Mat& Gd,
                           double rho, const LmiOptions& opt = {});

struct ControllerDesign {
  Plant plant;
  double mu = 0.0;
  double rho = 0.0;
  int n_tilde = 0;
  Mat G0;
  Mat Y0;
  Mat Gd;
  SymMat X;
  Mat Y;
  Mat K0;
  Mat K;
  SymMat P;
  DilationSpec dilation;
  LmiDiagnostics diagnostics;
};

/// Assembles K0 = Y0 (G0 - I)^{-1}, K = Y X^{-1}, P = X^{-1} and the dilation
/// from already computed pieces. Does not check invariants.
ControllerDesign assemble_design(const Plant& plant, double mu, double rho,
                                 const Mat& G0, const Mat& Y0, const Mat& Gd,
                                 const SymMat& X, const Mat& Y);

ControllerDesign build_controller(const Plant& plant, double mu, double rho,
                                  const LmiOptions& opt = {});

struct InvariantReport {
  double generator_residual = 0.0;  // |A G0 - G0 A + B Y0 - A|
  double g0b_residual = 0.0;        // |G0 B|
  double homogeneity_residual = 0.0;  // |A0 Gd - (Gd + mu I) A0|
  double gdb_residual = 0.0;          // |Gd B - B|
  double lmi_residual = 0.0;          // relative to |X|
  double gain_residual = 0.0;         // K vs Y X^{-1}, K0 vs Y0 (G0 - I)^{-1}
  double lambda_min_x = 0.0;
  double lambda_min_gx = 0.0;
  double skew_residual = 0.0;  // P^{1/2}(A0 + BK + rho Gd)P^{-1/2} + transpose
  bool ok = false;
  std::string failure;
};

InvariantReport check_invariants(const ControllerDesign& d);

/// Throws InvariantViolation with the first failing item.
void require_invariants(const ControllerDesign& d);

/// u(x) = K0 x + ||x||_d^{1+mu} K d(-ln ||x||_d) x, and 0 at the origin
/// (for mu = -1 that value is a convention).
Vec eval_control(const ControllerDesign& d, const Vec& x);

/// |grad ||x||_d (Ax + Bu(x)) + rho ||x||_d^{1+mu}|
double lyapunov_decay_residual(const ControllerDesign& d, const Vec& x);

}  // namespace homctl
