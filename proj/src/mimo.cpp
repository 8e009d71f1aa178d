#include "homctl/mimo.hpp"

#include <sstream>
#include <stdexcept>

namespace homctl {

namespace {

Vec block_of(const Vec& x, int off, int dim) { return x.segment(off, dim); }

}  // namespace

CascadeSkeleton decompose(const Mat& A, const Mat& B, const std::vector<int>& dims) {
  validate_plant(Plant{A, B});
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  if (dims.empty()) throw std::invalid_argument("decompose: no blocks given");
  if (static_cast<int>(dims.size()) != m) {
    std::ostringstream os;
    os << "decompose: " << dims.size() << " blocks but B has " << m << " columns";
    throw std::invalid_argument(os.str());
  }
  int total = 0;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("decompose: block dimension < 1");
    total += d;
  }
  if (total != n) {
    std::ostringstream os;
    os << "decompose: block dimensions sum to " << total << ", state has " << n;
    throw std::invalid_argument(os.str());
  }

  CascadeSkeleton s;
  s.plant = Plant{A, B};
  s.dims = dims;
  int off = 0;
  for (int d : dims) {
    s.offsets.push_back(off);
    off += d;
  }
  const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff());
  const double tolb = 1e-12 * std::max(1.0, B.cwiseAbs().maxCoeff());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < i; ++j) {
      const double v =
          A.block(s.offsets[i], s.offsets[j], dims[i], dims[j]).cwiseAbs().maxCoeff();
      if (v > tol) {
        std::ostringstream os;
        os << "A is not block upper-triangular: block (" << i + 1 << "," << j + 1
           << ") has an entry of size " << v;
        throw StructureError(os.str(), i + 1, j + 1);
      }
    }
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const double v = B.block(s.offsets[i], j, dims[i], 1).cwiseAbs().maxCoeff();
      if (v > tolb) {
        std::ostringstream os;
        os << "B is not block diagonal: block (" << i + 1 << "," << j + 1 << ") is nonzero";
        throw StructureError(os.str(), i + 1, j + 1);
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    Plant p{A.block(s.offsets[i], s.offsets[i], dims[i], dims[i]),
            B.block(s.offsets[i], i, dims[i], 1)};
    try {
      controllability_index(p);
    } catch (const Uncontrollable& e) {
      std::ostringstream os;
      os << "block " << i + 1 << ": " << e.what();
      throw Uncontrollable(os.str(), e.rank(), e.required());
    }
    if (!is_nilpotent(p.A)) {
      std::ostringstream os;
      os << "block " << i + 1 << ": diagonal block A_" << i + 1 << " is not nilpotent";
      throw StructureError(os.str(), i + 1, i + 1);
    }
    s.blocks.push_back(std::move(p));
  }
  return s;
}

CascadeDesign cascade_design(const CascadeSkeleton& skel, const std::vector<double>& mu,
                             const std::vector<double>& rho, const LmiOptions& opt) {
  const std::size_t m = skel.blocks.size();
  if (mu.size() != m || rho.size() != m)
    throw std::invalid_argument("cascade_design: need one mu and one rho per block");
  bool any_neg = false, any_pos = false;
  for (double v : mu) {
    any_neg = any_neg || v < 0.0;
    any_pos = any_pos || v > 0.0;
  }
  if (any_neg && any_pos)
    throw std::invalid_argument("cascade_design: all block degrees mu_i must share one sign");
  CascadeDesign c;
  c.skeleton = skel;
  for (std::size_t i = 0; i < m; ++i)
    c.blocks.push_back(build_controller(skel.blocks[i], mu[i], rho[i], opt));
  c.certified.assign(m, std::nullopt);
  return c;
}

void certify_blocks(CascadeDesign& c, const CertifyOptions& opt) {
  c.certified.resize(c.blocks.size());
  for (std::size_t i = 0; i < c.blocks.size(); ++i)
    c.certified[i] = certify(c.blocks[i], opt).pass;
}

CascadeScheme build_cascade_scheme(const CascadeDesign& c, double h) {
  CascadeScheme s;
  s.h = h;
  s.offsets = c.skeleton.offsets;
  for (const auto& b : c.blocks) s.blocks.push_back(build_scheme(b, h));
  return s;
}

std::vector<std::vector<double>> cascade_full_sequence(const CascadeScheme& s,
                                                       const Vec& xk) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    const auto dim = static_cast<int>(s.blocks[i].design.plant.n());
    out.push_back(full_control_sequence(s.blocks[i], block_of(xk, s.offsets[i], dim)));
  }
  return out;
}

CascadeControl cascade_consistent_control(const CascadeDesign& c, const CascadeScheme& s,
                                          const Vec& xk) {
  CascadeControl r;
  r.u = Vec::Zero(static_cast<Eigen::Index>(s.blocks.size()));
  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    const auto dim = static_cast<int>(s.blocks[i].design.plant.n());
    r.u(static_cast<Eigen::Index>(i)) =
        consistent_control(s.blocks[i], block_of(xk, s.offsets[i], dim));
    if (i >= c.certified.size() || !c.certified[i].value_or(false))
      r.uncertified.push_back(static_cast<int>(i) + 1);
  }
  return r;
}

std::vector<double> block_norms(const CascadeDesign& c, const Vec& x) {
  std::vector<double> r;
  for (std::size_t i = 0; i < c.blocks.size(); ++i)
    r.push_back(hom_norm(c.blocks[i].dilation,
                         block_of(x, c.skeleton.offsets[i], c.skeleton.dims[i])));
  return r;
}

}  // namespace homctl
