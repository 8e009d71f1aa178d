#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homctl/synthesis.hpp"

namespace homctl {

/// Precomputed matrices of the sampled scheme at step h (single input).
struct SampledScheme {
  ControllerDesign design;
  double h = 0.0;
  double hat_h = 0.0;  // 1 / (|mu| rho n)
  Mat Ah, Bh;
  Mat Wh;      // [Bh, Ah Bh, ..., Ah^{n-1} Bh]
  Mat Wh_inv;
  Mat Ahn;     // Ah^n
  Mat Lh;      // Bh e_n' Wh^{-1}
  Mat Fh;      // Ah - Lh Ah^n, nilpotent
  double cond_w = 0.0;  // condition number of the row-equilibrated Wh
};

/// Throws SingularMatrix when the row-equilibrated Wh has condition number
/// above max_cond, std::invalid_argument for h <= 0 or m != 1.
SampledScheme build_scheme(const ControllerDesign& d, double h,
                           double max_cond = 1e12);

double hat_h(const ControllerDesign& d);

/// Closed-loop flow map over time tau for states with ||x||_d = r.
/// Zero for r = 0 and once the state has been extinguished (mu < 0).
Mat q_matrix(const ControllerDesign& d, double tau, double r);

/// u(t_k), ..., u(t_{k+n-1}) (chronological) driving x_k to Q_{nh} x_k.
std::vector<double> full_control_sequence(const SampledScheme& s, const Vec& xk);

/// Row vector e_n' Wh^{-1} (Q_{nh}(r) - Ah^n).
RowVec consistent_gain(const SampledScheme& s, double r);

/// K_h(||x||_d) x; zero at the origin.
double consistent_control(const SampledScheme& s, const Vec& x);

/// Fh + Lh Q_{nh}(r)
Mat step_matrix(const SampledScheme& s, double r);

/// x -> M_h(||x||_d) x
Vec step_map(const SampledScheme& s, const Vec& x);

/// Theta_k(delta, v) with step delta * hat_h.
Mat theta(const ControllerDesign& d, double delta, const Vec& v, int k);

struct Radii {
  double hat_h = 0.0;
  std::optional<double> r_lower_minus;  // mu < 0, rigorous
  std::optional<double> r_upper_plus;   // mu > 0, triangle-inequality bound
  std::optional<double> r_upper_minus;  // empirical only; never computed here
  double r_star = 0.0;
};

/// max_{i=1..n} |F^{i-1} d(ln r)|_P at step hat_h.
double lower_radius_function(const SampledScheme& at_hat_h, double r);

Radii compute_radii(const ControllerDesign& d);

struct CertifyOptions {
  int grid_size = 1000;
  int k_star = 1;
  double margin = 1e-8;
  double delta_min_ratio = 1e-6;  // grid starts at ratio * r_star
  int samples = 1024;             // (delta, v) pairs when k_star > 1
};

struct CertificateReport {
  std::vector<double> grid;
  // k_star = 1: lambda_min(Delta(delta)). k_star > 1: 1 - |Theta v|_d.
  std::vector<double> values;
  std::string metric;
  bool pass = false;
  bool sampled = false;
  int k_star = 1;
  double margin = 0.0;
  double mu = 0.0;
  double rho = 0.0;
  Radii radii;
  std::optional<double> h_max;
  double min_value = 0.0;
};

/// P - M' P M with M = M_{delta hat_h}(1).
SymMat certificate_matrix(const ControllerDesign& d, double delta);

CertificateReport certify(const ControllerDesign& d, const CertifyOptions& opt = {});

}  // namespace homctl
