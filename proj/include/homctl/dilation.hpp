#pragma once

#include "homctl/matrixkit.hpp"

namespace homctl {

/// Linear dilation d(s) = e^{s Gd} with the weighting P of ||x|| = sqrt(x'Px)
/// and a homogeneity degree mu carried along for the feedback built on it.
struct DilationSpec {
  Mat generator;
  double mu = 0.0;
  SymMat weight;
};

/// Power-law sandwich sigma_lower(|x|) <= ||x||_d <= sigma_upper(|x|).
struct NormBounds {
  double alpha = 1.0;
  double beta = 1.0;

  double sigma_lower(double r) const;
  double sigma_upper(double r) const;
};

struct MonotoneCheck {
  bool ok = false;
  double eigenvalue = 0.0;  // lambda_min(P Gd + Gd' P)
};

/// Throws InvalidDilation if Gd is not anti-Hurwitz or P is not PD,
/// std::invalid_argument on shape errors.
void validate(const DilationSpec& spec);

Mat dilation_at(const DilationSpec& spec, double s);

double hom_norm(const DilationSpec& spec, const Vec& x);

/// d||x||_d / dx. Throws std::invalid_argument at x = 0.
RowVec hom_norm_gradient(const DilationSpec& spec, const Vec& x);

NormBounds norm_bounds(const DilationSpec& spec);

MonotoneCheck check_monotone(const DilationSpec& spec);

}  // namespace homctl
