#pragma once

#include <optional>
#include <vector>

#include "homctl/discretization.hpp"
#include "homctl/synthesis.hpp"

namespace homctl {

/// Block upper-triangular plant with one input per block:
///   A = [A_1 A_12 ...; 0 A_2 ...; ...], B = blockdiag(B_1, ..., B_m).
struct CascadeSkeleton {
  Plant plant;
  std::vector<int> dims;
  std::vector<int> offsets;
  std::vector<Plant> blocks;
};

struct CascadeDesign {
  CascadeSkeleton skeleton;
  std::vector<ControllerDesign> blocks;
  /// Per-block certificate verdicts; empty optional means not checked.
  std::vector<std::optional<bool>> certified;
};

/// Validates the block structure. StructureError names the offending block
/// with 1-based indices; uncontrollable blocks raise Uncontrollable.
CascadeSkeleton decompose(const Mat& A, const Mat& B, const std::vector<int>& dims);

/// Per-block designs. All mu must share a sign.
CascadeDesign cascade_design(const CascadeSkeleton& skel, const std::vector<double>& mu,
                             const std::vector<double>& rho, const LmiOptions& opt = {});

/// Runs certify() on every block and stores the verdicts.
void certify_blocks(CascadeDesign& c, const CertifyOptions& opt = {});

struct CascadeScheme {
  std::vector<SampledScheme> blocks;
  std::vector<int> offsets;
  double h = 0.0;
};

CascadeScheme build_cascade_scheme(const CascadeDesign& c, double h);

/// Per-block chronological control programs, each computed from the block's
/// own state.
std::vector<std::vector<double>> cascade_full_sequence(const CascadeScheme& s,
                                                       const Vec& xk);

struct CascadeControl {
  Vec u;
  std::vector<int> uncertified;  // 1-based block indices lacking a pass verdict
};

CascadeControl cascade_consistent_control(const CascadeDesign& c, const CascadeScheme& s,
                                          const Vec& xk);

/// ||x_i||_{d_i} for every block.
std::vector<double> block_norms(const CascadeDesign& c, const Vec& x);

}  // namespace homctl
