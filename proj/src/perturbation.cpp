#include <cmath>
#include <numbers>
#include <stdexcept>

#include "homctl/simulator.hpp"

namespace homctl {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double unit_uniform(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

Perturbation::Perturbation(const PerturbationSpec& spec, Eigen::Index n)
    : spec_(spec), n_(n), noise_rng_(splitmix(spec.seed)) {
  if (spec.disturbance < 0.0 || spec.noise < 0.0 || !std::isfinite(spec.disturbance) ||
      !std::isfinite(spec.noise))
    throw std::invalid_argument("perturbation magnitudes must be finite and >= 0");
  if (spec.modes < 1) throw std::invalid_argument("perturbation needs at least one mode");
  std::mt19937_64 g(spec.seed);
  amp_.resize(n, spec.modes);
  freq_.resize(n, spec.modes);
  phase_.resize(n, spec.modes);
  for (Eigen::Index i = 0; i < n; ++i) {
    double total = 0.0;
    for (int k = 0; k < spec.modes; ++k) {
      amp_(i, k) = 0.1 + unit_uniform(g);
      freq_(i, k) = 0.5 + 4.5 * unit_uniform(g);
      phase_(i, k) = 2.0 * std::numbers::pi * unit_uniform(g);
      total += amp_(i, k);
    }
    amp_.row(i) /= total;  // each component bounded by 1
  }
}

Vec Perturbation::disturbance(double t) const {
  Vec q = Vec::Zero(n_);
  if (spec_.disturbance == 0.0) return q;
  for (Eigen::Index i = 0; i < n_; ++i)
    for (Eigen::Index k = 0; k < amp_.cols(); ++k)
      q(i) += amp_(i, k) * std::sin(freq_(i, k) * t + phase_(i, k));
  return q * (spec_.disturbance / std::sqrt(static_cast<double>(n_)));
}

Vec Perturbation::next_noise() {
  Vec q(n_);
  for (Eigen::Index i = 0; i < n_; ++i) q(i) = 2.0 * unit_uniform(noise_rng_) - 1.0;
  if (spec_.noise == 0.0) return Vec::Zero(n_);
  return q * (spec_.noise / std::sqrt(static_cast<double>(n_)));
}

}  // namespace homctl
