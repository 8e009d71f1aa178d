#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "homctl/discretization.hpp"
#include "homctl/mimo.hpp"

namespace homctl {

enum class SchemeKind { consistent, full_sequence, explicit_zoh, open_loop };

std::string to_string(SchemeKind k);
/// Accepts consistent, full_sequence, explicit, open_loop.
SchemeKind parse_scheme(const std::string& s);

/// Additive disturbance q_p(t) (sum of seeded sinusoids) and measurement
/// noise q_m(t_k) (seeded uniform draws). Both bounded in the Euclidean norm
/// by their magnitudes.
struct PerturbationSpec {
  double disturbance = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  int modes = 3;

  bool active() const { return disturbance != 0.0 || noise != 0.0; }
};

class Perturbation {
 public:
  Perturbation(const PerturbationSpec& spec, Eigen::Index n);
  Vec disturbance(double t) const;
  /// Draws the next noise sample; call once per sampling instant, in order.
  Vec next_noise();

 private:
  PerturbationSpec spec_;
  Eigen::Index n_;
  Mat amp_, freq_, phase_;  // n x modes
  std::mt19937_64 noise_rng_;
};

/// Uniform double in [0, 1) from the top 53 bits; identical on every
/// platform, unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& g);

struct SimConfig {
  SchemeKind scheme = SchemeKind::consistent;
  double h = 0.05;
  double t_final = 10.0;
  Vec x0;
  PerturbationSpec perturbation;
  int substeps = 16;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> controls;
  std::vector<double> hom_norms;               // max over blocks for cascades
  std::vector<std::vector<double>> block_norms;  // cascades only
  SimConfig config;
  std::string fingerprint;
  bool diverged = false;
  std::string note;
  std::vector<int> uncertified_blocks;
};

Trajectory simulate(const ControllerDesign& d, const SimConfig& cfg);
Trajectory simulate(const CascadeDesign& c, const SimConfig& cfg);

/// First sample time after which |x|_2 <= threshold up to the horizon end.
/// Empty when never reached or the run diverged.
std::optional<double> settling_time(const Trajectory& tr, double threshold = 1e-9);

/// Same for the state slice [offset, offset + dim).
std::optional<double> settling_time_range(const Trajectory& tr, int offset, int dim,
                                          double threshold = 1e-9);

/// Total variation of u over the final tail_fraction of the horizon, per
/// unit time.
double chattering_index(const Trajectory& tr, double tail_fraction = 0.2);

struct IssRow {
  double noise = 0.0;
  double disturbance = 0.0;
  std::vector<double> bounds;      // sup |x|_2 over the last 20%, per trial
  std::vector<double> hom_bounds;  // sup |x|_d over the last 20%, per trial
  double max_bound = 0.0;
  double mean_bound = 0.0;
  double max_hom_bound = 0.0;
  int diverged = 0;
};

/// Runs `trials` seeded simulations for every (noise, disturbance) pair.
/// Trial t uses the same seed for every pair, so rows differ only in
/// magnitude.
std::vector<IssRow> iss_sweep(const ControllerDesign& d, const SimConfig& base,
                              const std::vector<double>& noise,
                              const std::vector<double>& disturbance, int trials);

std::string design_fingerprint(const ControllerDesign& d);
std::string design_fingerprint(const CascadeDesign& c);

}  // namespace homctl
