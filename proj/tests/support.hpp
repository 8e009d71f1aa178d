#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "homctl/discretization.hpp"
#include "homctl/mimo.hpp"
#include "homctl/simulator.hpp"
#include "homctl/synthesis.hpp"

namespace homctl::test {

// Integrator chain of length n with input on the last state.
Plant chain(int n);

// Designs shared across tests; built once per process.
const ControllerDesign& finite_time3();   // n=3, mu=-0.25, rho=1
const ControllerDesign& fixed_time3();    // n=3, mu=0.25, rho=1
const ControllerDesign& chain2_half();    // n=2, mu=-0.5, rho=2
const ControllerDesign& chain2_one();     // n=2, mu=-1, rho=2
const CascadeDesign& cascade5();          // 3+2 cascade with A(0,3) = 1

Vec x0_finite_time();  // (1, -1, 0)
Vec x0_cascade();      // (1, -1, 0, 1, 0)

// Uniform in [-1,1]^n times 10^e with e uniform in [lo_exp, hi_exp].
Vec random_state(std::mt19937_64& g, Eigen::Index n, double lo_exp = -1.0,
                 double hi_exp = 1.0);
double uniform(std::mt19937_64& g, double lo, double hi);

// Property probes. Each returns the worst error over `samples` random draws,
// measured in the unit the acceptance tolerance is stated in.
struct Probe {
  double worst = 0.0;
  std::string where;  // description of the worst sample
};

Probe decay_law(const ControllerDesign& d, int samples, std::uint64_t seed);   // rel
Probe fh_nilpotent(const ControllerDesign& d, int samples, std::uint64_t seed);  // rel
Probe step_symmetry(const ControllerDesign& d, int samples, std::uint64_t seed);
Probe control_symmetry(const ControllerDesign& d, int samples, std::uint64_t seed);
Probe w_inverse_identity(const ControllerDesign& d, int samples, std::uint64_t seed);
Probe skew_residual(const ControllerDesign& d);
Probe norm_homogeneity(const ControllerDesign& d, int samples, std::uint64_t seed);  // rel
Probe gradient_fd(const ControllerDesign& d, int samples, std::uint64_t seed);       // rel
Probe lyapunov_decay(const ControllerDesign& d, int samples, std::uint64_t seed);    // rel
// Largest |x_n| over states started inside the dead-beat ball (mu < 0).
Probe dead_beat(const ControllerDesign& d, double h, int samples, std::uint64_t seed);

}  // namespace homctl::test
