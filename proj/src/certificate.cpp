// Grid certificate for consistency of the static discretization.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "homctl/discretization.hpp"
#include "parallel.hpp"

namespace homctl {

namespace {

double radical_inverse(std::uint64_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] =
        (i == count - 1) ? hi : std::exp(a + (b - a) * i / (count - 1));
  return g;
}

}  // namespace

CertificateReport certify(const ControllerDesign& d, const CertifyOptions& opt) {
  if (opt.grid_size < 2) throw std::invalid_argument("certify: grid_size must be >= 2");
  if (opt.k_star < 1) throw std::invalid_argument("certify: k_star must be >= 1");
  if (!(opt.delta_min_ratio > 0.0 && opt.delta_min_ratio < 1.0))
    throw std::invalid_argument("certify: delta_min_ratio must lie in (0, 1)");

  CertificateReport rep;
  rep.k_star = opt.k_star;
  rep.margin = opt.margin;
  rep.mu = d.mu;
  rep.rho = d.rho;
  rep.radii = compute_radii(d);
  const double rstar = rep.radii.r_star;
  const double dmin = opt.delta_min_ratio * rstar;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  if (opt.k_star == 1) {
    rep.metric = "lambda_min";
    rep.grid = log_grid(dmin, rstar, opt.grid_size);
    rep.values.assign(rep.grid.size(), nan);
    detail::parallel_for(rep.grid.size(), [&](std::size_t i) {
      try {
        rep.values[i] = lambda_min(certificate_matrix(d, rep.grid[i]));
      } catch (const Error&) {
        rep.values[i] = nan;
      }
    });
  } else {
    const Eigen::Index n = d.plant.n();
    if (n + 1 > static_cast<Eigen::Index>(sizeof(kPrimes) / sizeof(kPrimes[0])))
      throw std::invalid_argument("certify: sampled mode supports n <= 23");
    rep.metric = "one_minus_norm";
    rep.sampled = true;
    // Halton points: coordinate 0 picks log(delta), the rest a direction.
    struct Sample {
      double delta;
      Vec v;
    };
    std::vector<Sample> pts;
    const double a = std::log(dmin), b = std::log(rstar);
    for (std::uint64_t idx = 1; pts.size() < static_cast<std::size_t>(opt.samples); ++idx) {
      Vec v(n);
      for (Eigen::Index j = 0; j < n; ++j)
        v(j) = 2.0 * radical_inverse(idx, kPrimes[j + 1]) - 1.0;
      const double nv = weighted_norm(v, d.P);
      if (nv < 1e-3) continue;
      pts.push_back({std::exp(a + (b - a) * radical_inverse(idx, kPrimes[0])), v / nv});
    }
    rep.grid.resize(pts.size());
    rep.values.assign(pts.size(), nan);
    detail::parallel_for(pts.size(), [&](std::size_t i) {
      rep.grid[i] = pts[i].delta;
      try {
        const Mat T = theta(d, pts[i].delta, pts[i].v, opt.k_star);
        rep.values[i] = 1.0 - hom_norm(d.dilation, T * pts[i].v);
      } catch (const Error&) {
        rep.values[i] = nan;
      }
    });
  }

  rep.pass = true;
  rep.min_value = std::numeric_limits<double>::infinity();
  for (double v : rep.values) {
    if (!(v > opt.margin)) rep.pass = false;
    if (std::isnan(v) || v < rep.min_value) rep.min_value = v;
  }
  return rep;
}

}  // namespace homctl
