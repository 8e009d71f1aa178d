#include "homctl/discretization.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace homctl {

double hat_h(const ControllerDesign& d) {
  return 1.0 / (std::abs(d.mu) * d.rho * static_cast<double>(d.plant.n()));
}

Mat q_matrix(const ControllerDesign& d, double tau, double r) {
  const Eigen::Index n = d.plant.n();
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("q_matrix: tau must be finite and >= 0");
  if (!(r >= 0.0)) throw std::invalid_argument("q_matrix: r must be >= 0");
  if (d.mu == 0.0) throw std::invalid_argument("q_matrix: mu = 0 is not supported");
  if (r == 0.0) return Mat::Zero(n, n);
  if (tau == 0.0) return Mat::Identity(n, n);

  const double mu = d.mu, rho = d.rho;
  const double lr = std::log(r);
  // Extinction: r^{-mu} <= -mu rho tau, compared in logs.
  if (mu < 0.0 && -mu * lr <= std::log(-mu * rho * tau)) return Mat::Zero(n, n);

  const double c = mu * rho * tau * std::exp(mu * lr);
  if (!(c > -1.0)) return Mat::Zero(n, n);  // rounding at the extinction edge
  const double shat = std::log1p(c) / (rho * mu);
  const Mat At = d.plant.A + d.plant.B * (d.K0 + d.K) + rho * d.Gd;
  // d(ln r) e^{-rho Gd shat} merged into one dilation; its argument stays
  // moderate even when r or shat are large.
  return dilation_at(d.dilation, lr - rho * shat) * expm(At * shat) *
         dilation_at(d.dilation, -lr);
}

SampledScheme build_scheme(const ControllerDesign& d, double h, double max_cond) {
  if (d.plant.m() != 1)
    throw std::invalid_argument("build_scheme: single-input design required");
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("build_scheme: h must be finite and > 0");
  const Eigen::Index n = d.plant.n();
  SampledScheme s;
  s.design = d;
  s.h = h;
  s.hat_h = hat_h(d);
  const DiscretePair dp = discretize_pair(d.plant.A, d.plant.B, h);
  s.Ah = dp.Ah;
  s.Bh = dp.Bh;
  s.Wh.resize(n, n);
  Vec c = s.Bh.col(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.Wh.col(i) = c;
    c = s.Ah * c;
  }
  // Rows of Wh scale like different powers of h; equilibrate before judging
  // conditioning and inverting.
  Vec rs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = s.Wh.row(i).cwiseAbs().maxCoeff();
    if (mx == 0.0) {
      std::ostringstream os;
      os << "Wh has a zero row at h = " << h;
      throw SingularMatrix(os.str(), std::numeric_limits<double>::infinity());
    }
    rs(i) = 1.0 / mx;
  }
  const Mat We = rs.asDiagonal() * s.Wh;
  s.Wh_inv = checked_inverse(We, max_cond, &s.cond_w) * rs.asDiagonal();
  s.Ahn = Mat::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) s.Ahn = s.Ahn * s.Ah;
  s.Lh = s.Bh * s.Wh_inv.row(n - 1);
  s.Fh = s.Ah - s.Lh * s.Ahn;
  return s;
}

std::vector<double> full_control_sequence(const SampledScheme& s, const Vec& xk) {
  const ControllerDesign& d = s.design;
  const Eigen::Index n = d.plant.n();
  const double r = hom_norm(d.dilation, xk);
  const double nh = static_cast<double>(n) * s.h;
  const Vec stacked = s.Wh_inv * ((q_matrix(d, nh, r) - s.Ahn) * xk);
  std::vector<double> u(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = stacked(n - 1 - i);
  return u;
}

RowVec consistent_gain(const SampledScheme& s, double r) {
  const ControllerDesign& d = s.design;
  const Eigen::Index n = d.plant.n();
  const double nh = static_cast<double>(n) * s.h;
  return s.Wh_inv.row(n - 1) * (q_matrix(d, nh, r) - s.Ahn);
}

double consistent_control(const SampledScheme& s, const Vec& x) {
  const double r = hom_norm(s.design.dilation, x);
  if (r == 0.0) return 0.0;
  return consistent_gain(s, r).dot(x);
}

Mat step_matrix(const SampledScheme& s, double r) {
  const double nh = static_cast<double>(s.design.plant.n()) * s.h;
  return s.Fh + s.Lh * q_matrix(s.design, nh, r);
}

Vec step_map(const SampledScheme& s, const Vec& x) {
  const double r = hom_norm(s.design.dilation, x);
  if (r == 0.0) return Vec::Zero(x.size());
  return step_matrix(s, r) * x;
}

Mat theta(const ControllerDesign& d, double delta, const Vec& v, int k) {
  if (!(delta > 0.0)) throw std::invalid_argument("theta: delta must be > 0");
  if (k < 0) throw std::invalid_argument("theta: k must be >= 0");
  const Eigen::Index n = d.plant.n();
  Mat T = Mat::Identity(n, n);
  if (k == 0) return T;
  const SampledScheme s = build_scheme(d, delta * hat_h(d));
  for (int i = 0; i < k; ++i) T = step_matrix(s, hom_norm(d.dilation, T * v)) * T;
  return T;
}

double lower_radius_function(const SampledScheme& s, double r) {
  const ControllerDesign& d = s.design;
  Mat T = dilation_at(d.dilation, std::log(r));
  double best = 0.0;
  for (Eigen::Index i = 0; i < d.plant.n(); ++i) {
    best = std::max(best, weighted_op_norm(T, d.P));
    T = s.Fh * T;
  }
  return best;
}

Radii compute_radii(const ControllerDesign& d) {
  if (d.mu == 0.0) throw std::invalid_argument("compute_radii: mu = 0");
  const SampledScheme s = build_scheme(d, hat_h(d));
  Radii out;
  out.hat_h = s.hat_h;
  if (d.mu < 0.0) {
    const double target = 1.0 - 1e-6;
    auto g = [&](double lr) { return lower_radius_function(s, std::exp(lr)); };
    double lo = 0.0, hi = 0.0, step = 1.0;
    while (g(lo) >= target) {
      lo -= step;
      step *= 2.0;
      if (lo < -700.0) throw Error("compute_radii: lower radius bracket failed");
    }
    step = 1.0;
    while (g(hi) < target) {
      hi += step;
      step *= 2.0;
      if (hi > 700.0) throw Error("compute_radii: upper radius bracket failed");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g(mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    out.r_lower_minus = std::exp(lo);
    out.r_star = std::pow(*out.r_lower_minus, d.mu);
  } else {
    const NormBounds nb = norm_bounds(d.dilation);
    double sum = 0.0;
    Mat T = s.Lh;
    for (Eigen::Index i = 0; i < d.plant.n(); ++i) {
      sum += weighted_op_norm(T, d.P);
      T = s.Fh * T;
    }
    out.r_upper_plus = nb.sigma_upper(sum) * (1.0 + 1e-12);
    out.r_star = std::pow(*out.r_upper_plus, d.mu);
  }
  return out;
}

SymMat certificate_matrix(const ControllerDesign& d, double delta) {
  const SampledScheme s = build_scheme(d, delta * hat_h(d));
  const Mat M = step_matrix(s, 1.0);
  return SymMat::symmetrized(d.P.mat() - M.transpose() * d.P.mat() * M);
}

}  // namespace homctl
