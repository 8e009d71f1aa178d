#include "homctl/dilation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace homctl {

namespace {

bool is_diagonal(const Mat& G) {
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      if (i != j && G(i, j) != 0.0) return false;
  return true;
}

// e^{s G}; the diagonal case (every integrator-chain design) skips expm.
Mat exp_generator(const Mat& G, double s) {
  if (is_diagonal(G)) {
    Vec d(G.rows());
    for (Eigen::Index i = 0; i < G.rows(); ++i) d(i) = std::exp(s * G(i, i));
    return d.asDiagonal();
  }
  return expm(s * G);
}

void check_shapes(const DilationSpec& spec) {
  require_square(spec.generator, "DilationSpec.generator");
  if (spec.weight.rows() != spec.generator.rows())
    throw std::invalid_argument("DilationSpec: weight and generator sizes differ");
}

void check_vec(const DilationSpec& spec, const Vec& x) {
  if (x.size() != spec.generator.rows()) {
    std::ostringstream os;
    os << "state has dimension " << x.size() << ", dilation acts on "
       << spec.generator.rows();
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

double NormBounds::sigma_lower(double r) const {
  if (r <= 0.0) return 0.0;
  return r >= 1.0 ? std::pow(r, 1.0 / alpha) : std::pow(r, 1.0 / beta);
}

double NormBounds::sigma_upper(double r) const {
  if (r <= 0.0) return 0.0;
  return r >= 1.0 ? std::pow(r, 1.0 / beta) : std::pow(r, 1.0 / alpha);
}

void validate(const DilationSpec& spec) {
  check_shapes(spec);
  Eigen::EigenSolver<Mat> es(spec.generator, false);
  const double re_min = es.eigenvalues().real().minCoeff();
  if (!(re_min > 0.0)) {
    std::ostringstream os;
    os << "dilation generator is not anti-Hurwitz (min Re(eig) = " << re_min
       << ")";
    throw InvalidDilation(os.str());
  }
  const double pmin = lambda_min(spec.weight);
  if (!(pmin > 0.0)) {
    std::ostringstream os;
    os << "weight matrix is not positive definite (lambda_min = " << pmin << ")";
    throw InvalidDilation(os.str());
  }
}

Mat dilation_at(const DilationSpec& spec, double s) {
  check_shapes(spec);
  if (!std::isfinite(s)) throw std::invalid_argument("dilation_at: s not finite");
  return exp_generator(spec.generator, s);
}

NormBounds norm_bounds(const DilationSpec& spec) {
  check_shapes(spec);
  const Mat Ph = sqrtm_pd(spec.weight);
  const Mat Pih = Ph.inverse();
  const Mat T = Ph * spec.generator * Pih;
  const SymMat S = SymMat::symmetrized(T + T.transpose());
  const SymEig e = sym_eig(S);
  NormBounds nb;
  nb.alpha = 0.5 * e.values(e.values.size() - 1);
  nb.beta = 0.5 * e.values(0);
  if (!(nb.beta > 0.0)) {
    std::ostringstream os;
    os << "dilation is not monotone in the weighted norm (beta = " << nb.beta
       << ")";
    throw InvalidDilation(os.str());
  }
  return nb;
}

MonotoneCheck check_monotone(const DilationSpec& spec) {
  check_shapes(spec);
  const Mat& P = spec.weight.mat();
  const Mat S = P * spec.generator + spec.generator.transpose() * P;
  MonotoneCheck c;
  c.eigenvalue = lambda_min(SymMat::symmetrized(S));
  c.ok = c.eigenvalue > 0.0;
  return c;
}

double hom_norm(const DilationSpec& spec, const Vec& x) {
  check_shapes(spec);
  check_vec(spec, x);
  const double r = weighted_norm(x, spec.weight);
  if (r < 1e-300) return 0.0;
  if (!std::isfinite(r)) throw std::invalid_argument("hom_norm: non-finite state");

  const NormBounds nb = norm_bounds(spec);
  // phi(s) = ||d(-s)x||_P is strictly decreasing.
  auto phi = [&](double s) {
    return weighted_norm(exp_generator(spec.generator, -s) * x, spec.weight);
  };
  // log sigma bounds, taken in logs so tiny or huge r cannot underflow
  const double lr = std::log(r);
  double lo = lr >= 0.0 ? lr / nb.alpha : lr / nb.beta;
  double hi = lr >= 0.0 ? lr / nb.beta : lr / nb.alpha;
  if (lo > hi) std::swap(lo, hi);

  // The bracket is rigorous in exact arithmetic; widen if rounding bites.
  double pad = 1e-9 * std::max(1.0, std::abs(lo));
  for (int k = 0; phi(lo) < 1.0; ++k) {
    if (k >= 200) throw InvalidDilation("hom_norm: lower bracket expansion failed");
    lo -= pad;
    pad *= 2.0;
  }
  pad = 1e-9 * std::max(1.0, std::abs(hi));
  for (int k = 0; phi(hi) > 1.0; ++k) {
    if (k >= 200) throw InvalidDilation("hom_norm: upper bracket expansion failed");
    hi += pad;
    pad *= 2.0;
  }

  for (int it = 0;; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(mid))) return std::exp(mid);
    if (it >= 200) throw InvalidDilation("hom_norm: bisection exceeded 200 iterations");
    if (phi(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
}

RowVec hom_norm_gradient(const DilationSpec& spec, const Vec& x) {
  const double nx = hom_norm(spec, x);
  if (nx == 0.0)
    throw std::invalid_argument("hom_norm_gradient: undefined at the origin");
  const Mat dm = exp_generator(spec.generator, -std::log(nx));
  const Vec z = dm * x;
  const Mat& P = spec.weight.mat();
  const double den = z.dot(P * spec.generator * z);
  return nx * (z.transpose() * P * dm) / den;
}

}  // namespace homctl
