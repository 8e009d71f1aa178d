#include "support.hpp"

#include <cmath>
#include <sstream>

namespace homctl::test {

Plant chain(int n) {
  Plant p;
  p.A = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) p.A(i, i + 1) = 1.0;
  p.B = Mat::Zero(n, 1);
  p.B(n - 1, 0) = 1.0;
  return p;
}

const ControllerDesign& finite_time3() {
  static const ControllerDesign d = build_controller(chain(3), -0.25, 1.0);
  return d;
}

const ControllerDesign& fixed_time3() {
  static const ControllerDesign d = build_controller(chain(3), 0.25, 1.0);
  return d;
}

const ControllerDesign& chain2_half() {
  static const ControllerDesign d = build_controller(chain(2), -0.5, 2.0);
  return d;
}

const ControllerDesign& chain2_one() {
  static const ControllerDesign d = build_controller(chain(2), -1.0, 2.0);
  return d;
}

const CascadeDesign& cascade5() {
  static const CascadeDesign c = [] {
    Mat A = Mat::Zero(5, 5);
    A(0, 1) = A(1, 2) = A(3, 4) = 1.0;
    A(0, 3) = 1.0;
    Mat B = Mat::Zero(5, 2);
    B(2, 0) = B(4, 1) = 1.0;
    return cascade_design(decompose(A, B, {3, 2}), {-0.25, -1.0}, {1.0, 2.0});
  }();
  return c;
}

Vec x0_finite_time() { return Vec{{1.0, -1.0, 0.0}}; }
Vec x0_cascade() { return Vec{{1.0, -1.0, 0.0, 1.0, 0.0}}; }

double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

Vec random_state(std::mt19937_64& g, Eigen::Index n, double lo_exp, double hi_exp) {
  Vec x(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) x(i) = uniform(g, -1.0, 1.0);
  } while (x.norm() < 1e-3);
  return std::pow(10.0, uniform(g, lo_exp, hi_exp)) * x;
}

namespace {

std::string describe(const Vec& x, double a, const char* an, double b = NAN,
                     const char* bn = nullptr) {
  std::ostringstream os;
  os.precision(6);
  os << "x=(" << x.transpose() << ") " << an << "=" << a;
  if (bn) os << " " << bn << "=" << b;
  return os.str();
}

void record(Probe& p, double err, const std::string& where) {
  if (!(err <= p.worst)) {  // NaN is always recorded
    p.worst = err;
    p.where = where;
  }
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// Flow of dr/dt = -rho r^{1+mu} from r0 after time t.
double decayed_norm(double r0, double mu, double rho, double t) {
  const double base = std::pow(r0, -mu) + mu * rho * t;
  if (base <= 0.0) return 0.0;
  return std::pow(base, -1.0 / mu);
}

}  // namespace

Probe decay_law(const ControllerDesign& d, int samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Probe p;
  const Eigen::Index n = d.plant.n();
  for (int i = 0; i < samples; ++i) {
    const Vec x = random_state(g, n, -2.0, 2.0);
    const double r = hom_norm(d.dilation, x);
    double tau;
    if (d.mu < 0.0) {
      const double t_ext = std::pow(r, -d.mu) / (-d.mu * d.rho);
      tau = uniform(g, 0.0, 0.95) * t_ext;
    } else {
      tau = uniform(g, 0.0, 3.0);
    }
    const double got = hom_norm(d.dilation, q_matrix(d, tau, r) * x);
    record(p, rel(got, decayed_norm(r, d.mu, d.rho, tau)), describe(x, tau, "tau"));
  }
  return p;
}

Probe fh_nilpotent(const ControllerDesign& d, int samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Probe p;
  for (int i = 0; i < samples; ++i) {
    const double h = std::pow(10.0, uniform(g, -2.0, 0.5));
    const SampledScheme s = build_scheme(d, h);
    Mat F = Mat::Identity(s.Fh.rows(), s.Fh.cols());
    for (Eigen::Index k = 0; k < d.plant.n(); ++k) F = F * s.Fh;
    const double scale = std::pow(std::max(1.0, s.Fh.norm()), static_cast<double>(d.plant.n()));
    std::ostringstream os;
    os << "h=" << h;
    record(p, F.norm() / scale, os.str());
  }
  return p;
}

Probe step_symmetry(const ControllerDesign& d, int samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Probe p;
  for (int i = 0; i < samples; ++i) {
    const Vec x = random_state(g, d.plant.n());
    const double s = uniform(g, -2.0, 2.0);
    const double h = uniform(g, 0.02, 0.3);
    const Mat ds = dilation_at(d.dilation, s);
    const Vec lhs = step_map(build_scheme(d, h), ds * x);
    const Vec rhs = ds * step_map(build_scheme(d, std::exp(d.mu * s) * h), x);
    const double scale = std::max({lhs.norm(), rhs.norm(), 1e-300});
    record(p, (lhs - rhs).norm() / scale, describe(x, s, "s", h, "h"));
  }
  return p;
}

Probe control_symmetry(const ControllerDesign& d, int samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Probe p;
  for (int i = 0; i < samples; ++i) {
    const Vec x = random_state(g, d.plant.n());
    const double s = uniform(g, -2.0, 2.0);
    const double h = uniform(g, 0.02, 0.3);
    const double lhs = consistent_control(build_scheme(d, h), dilation_at(d.dilation, s) * x);
    const double rhs = std::exp((1.0 + d.mu) * s) *
                       consistent_control(build_scheme(d, std::exp(d.mu * s) * h), x);
    record(p, rel(lhs, rhs), describe(x, s, "s", h, "h"));
  }
  return p;
}

Probe w_inverse_identity(const ControllerDesign& d, int samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Probe p;
  const Eigen::Index n = d.plant.n();
  const Mat I = Mat::Identity(n, n);
  // Integral of e^{tA} B over [0, n], as the input block of the pair at step n.
  const Vec integral = discretize_pair(d.plant.A, d.plant.B, static_cast<double>(n)).Bh.col(0);
  for (int i = 0; i < samples; ++i) {
    const double h = std::pow(10.0, uniform(g, -2.0, 0.5));
    const SampledScheme s = build_scheme(d, h);
    const Mat d_star = expm(std::log(h) * (I - d.G0));  // degree -1 dilation
    const Vec v = s.Wh_inv * d_star * integral;
    std::ostringstream os;
    os << "h=" << h;
    record(p, (v - Vec::Ones(n)).cwiseAbs().maxCoeff(), os.str());
  }
  return p;
}

Probe skew_residual(const ControllerDesign& d) {
  Probe p;
  p.worst = check_invariants(d).skew_residual;
  p.where = "design";
  return p;
}

Probe norm_homogeneity(const ControllerDesign& d, int samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Probe p;
  for (int i = 0; i < samples; ++i) {
    const Vec x = random_state(g, d.plant.n(), -3.0, 3.0);
    const double s = uniform(g, -5.0, 5.0);
    const double lhs = hom_norm(d.dilation, dilation_at(d.dilation, s) * x);
    record(p, rel(lhs, std::exp(s) * hom_norm(d.dilation, x)), describe(x, s, "s"));
  }
  return p;
}

Probe gradient_fd(const ControllerDesign& d, int samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Probe p;
  const Eigen::Index n = d.plant.n();
  for (int i = 0; i < samples; ++i) {
    const Vec x = random_state(g, n, -2.0, 2.0);
    const RowVec grad = hom_norm_gradient(d.dilation, x);
    const double eps = 1e-4 * x.norm();
    RowVec fd(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      Vec e = Vec::Zero(n);
      e(j) = eps;
      auto f = [&](double k) { return hom_norm(d.dilation, x + k * e); };
      // five-point stencil, O(eps^4)
      fd(j) = (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * eps);
    }
    record(p, (grad - fd).norm() / grad.norm(), describe(x, eps, "eps"));
  }
  return p;
}

Probe lyapunov_decay(const ControllerDesign& d, int samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Probe p;
  for (int i = 0; i < samples; ++i) {
    const Vec x = random_state(g, d.plant.n(), -3.0, 3.0);
    const double r = hom_norm(d.dilation, x);
    const double scale = d.rho * std::pow(r, 1.0 + d.mu);
    record(p, lyapunov_decay_residual(d, x) / scale, describe(x, r, "r"));
  }
  return p;
}

Probe dead_beat(const ControllerDesign& d, double h, int samples, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Probe p;
  const Radii radii = compute_radii(d);
  const double ball = *radii.r_lower_minus * std::pow(radii.hat_h / h, 1.0 / d.mu);
  const Eigen::Index n = d.plant.n();
  for (int i = 0; i < samples; ++i) {
    const Vec v = random_state(g, n);
    const double target = uniform(g, 0.05, 1.0) * ball;
    // Exact rescaling onto the requested homogeneous norm.
    const Vec x0 = dilation_at(d.dilation, std::log(target / hom_norm(d.dilation, v))) * v;
    SimConfig cfg;
    cfg.scheme = SchemeKind::consistent;
    cfg.h = h;
    cfg.t_final = static_cast<double>(n) * h;
    cfg.x0 = x0;
    cfg.substeps = 1;
    const Trajectory tr = simulate(d, cfg);
    const double err = tr.diverged ? INFINITY : tr.states.back().norm();
    record(p, err, describe(x0, target, "|x0|_d", ball, "ball"));
  }
  return p;
}

}  // namespace homctl::test
