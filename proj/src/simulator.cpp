#include "homctl/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace homctl {

namespace {

constexpr double kDivergence = 1e300;

struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ULL;
    }
  }
  void num(double v) { bytes(&v, sizeof v); }
  void mat(const Mat& m) {
    const std::int64_t r = m.rows(), c = m.cols();
    bytes(&r, sizeof r);
    bytes(&c, sizeof c);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) num(m(i, j));
  }
  void design(const ControllerDesign& d) {
    mat(d.plant.A);
    mat(d.plant.B);
    num(d.mu);
    num(d.rho);
    mat(d.Gd);
    mat(d.X.mat());
    mat(d.Y);
    mat(d.K0);
    mat(d.K);
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

// Exact zero-order-hold propagation, with q_p frozen at sub-interval
// midpoints when a disturbance is present.
struct Propagator {
  Mat Ah, Bh;        // full step
  Mat As, Bs, Gs;    // sub-step; Gs = int_0^{h/S} e^{sA} ds
  int substeps = 1;
  double h = 0.0;

  Propagator(const Plant& p, double step, int sub) : substeps(sub), h(step) {
    const DiscretePair full = discretize_pair(p.A, p.B, step);
    Ah = full.Ah;
    Bh = full.Bh;
    const double hs = step / sub;
    const DiscretePair part = discretize_pair(p.A, p.B, hs);
    As = part.Ah;
    Bs = part.Bh;
    Gs = discretize_pair(p.A, Mat::Identity(p.n(), p.n()), hs).Bh;
  }

  Vec step(const Vec& x, const Vec& u, double t, const Perturbation* pert,
           bool disturbed) const {
    if (!disturbed) return Ah * x + Bh * u;
    Vec y = x;
    const double hs = h / substeps;
    for (int j = 0; j < substeps; ++j)
      y = As * y + Bs * u + Gs * pert->disturbance(t + (j + 0.5) * hs);
    return y;
  }
};

using ControlFn = std::function<Vec(long, const Vec&)>;
using NormFn = std::function<std::vector<double>(const Vec&)>;

void check_config(const SimConfig& cfg, Eigen::Index n) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h))
    throw std::invalid_argument("simulation step h must be finite and > 0");
  if (!(cfg.t_final >= cfg.h) || !std::isfinite(cfg.t_final))
    throw std::invalid_argument("simulation horizon must satisfy t_final >= h");
  if (cfg.substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (cfg.x0.size() != n) {
    std::ostringstream os;
    os << "initial state has dimension " << cfg.x0.size() << ", plant has " << n;
    throw std::invalid_argument(os.str());
  }
  if (!cfg.x0.allFinite()) throw std::invalid_argument("initial state is not finite");
}

Trajectory run(const Plant& plant, const SimConfig& cfg, const ControlFn& control,
               const NormFn& norms, bool cascade) {
  check_config(cfg, plant.n());
  const Propagator prop(plant, cfg.h, cfg.substeps);
  Perturbation pert(cfg.perturbation, plant.n());
  const bool disturbed = cfg.perturbation.disturbance != 0.0;
  const long steps = std::lround(cfg.t_final / cfg.h);

  Trajectory tr;
  tr.config = cfg;
  Vec x = cfg.x0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.h;
    std::vector<double> bn;
    Vec u;
    try {
      bn = norms(x);
      u = control(k, x + pert.next_noise());
    } catch (const std::exception& e) {
      tr.diverged = true;
      tr.note = std::string("aborted at t = ") + std::to_string(t) + ": " + e.what();
      break;
    }
    if (!u.allFinite()) {
      tr.diverged = true;
      tr.note = "aborted at t = " + std::to_string(t) + ": non-finite control";
      break;
    }
    double hn = 0.0;
    for (double v : bn) hn = std::max(hn, v);
    tr.times.push_back(t);
    tr.states.push_back(x);
    tr.controls.push_back(u);
    tr.hom_norms.push_back(hn);
    if (cascade) tr.block_norms.push_back(bn);
    if (k == steps) break;

    const Vec xn = prop.step(x, u, t, &pert, disturbed);
    if (!xn.allFinite() || xn.norm() > kDivergence) {
      tr.diverged = true;
      tr.note = "divergence guard tripped after t = " + std::to_string(t);
      break;
    }
    x = xn;
  }
  return tr;
}

}  // namespace

std::string to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::consistent: return "consistent";
    case SchemeKind::full_sequence: return "full_sequence";
    case SchemeKind::explicit_zoh: return "explicit";
    case SchemeKind::open_loop: return "open_loop";
  }
  return "unknown";
}

SchemeKind parse_scheme(const std::string& s) {
  if (s == "consistent") return SchemeKind::consistent;
  if (s == "full_sequence") return SchemeKind::full_sequence;
  if (s == "explicit") return SchemeKind::explicit_zoh;
  if (s == "open_loop") return SchemeKind::open_loop;
  throw std::invalid_argument("unknown scheme '" + s +
                              "' (expected consistent, full_sequence, explicit, open_loop)");
}

std::string design_fingerprint(const ControllerDesign& d) {
  Fnv f;
  f.design(d);
  return f.hex();
}

std::string design_fingerprint(const CascadeDesign& c) {
  Fnv f;
  f.mat(c.skeleton.plant.A);
  f.mat(c.skeleton.plant.B);
  for (const auto& b : c.blocks) f.design(b);
  return f.hex();
}

Trajectory simulate(const ControllerDesign& d, const SimConfig& cfg) {
  const Eigen::Index n = d.plant.n(), m = d.plant.m();
  ControlFn ctl;
  std::optional<SampledScheme> scheme;
  if (cfg.scheme == SchemeKind::consistent || cfg.scheme == SchemeKind::full_sequence)
    scheme = build_scheme(d, cfg.h);
  std::vector<double> program;
  switch (cfg.scheme) {
    case SchemeKind::consistent:
      ctl = [&](long, const Vec& xm) { return Vec::Constant(1, consistent_control(*scheme, xm)); };
      break;
    case SchemeKind::full_sequence:
      ctl = [&](long k, const Vec& xm) {
        if (k % n == 0) program = full_control_sequence(*scheme, xm);
        return Vec::Constant(1, program[static_cast<std::size_t>(k % n)]);
      };
      break;
    case SchemeKind::explicit_zoh:
      ctl = [&](long, const Vec& xm) { return eval_control(d, xm); };
      break;
    case SchemeKind::open_loop:
      ctl = [m](long, const Vec&) { return Vec::Zero(m); };
      break;
  }
  NormFn norms = [&](const Vec& x) { return std::vector<double>{hom_norm(d.dilation, x)}; };
  Trajectory tr = run(d.plant, cfg, ctl, norms, false);
  tr.fingerprint = design_fingerprint(d);
  return tr;
}

Trajectory simulate(const CascadeDesign& c, const SimConfig& cfg) {
  const std::size_t nb = c.blocks.size();
  const Eigen::Index m = static_cast<Eigen::Index>(nb);
  std::optional<CascadeScheme> scheme;
  if (cfg.scheme == SchemeKind::consistent || cfg.scheme == SchemeKind::full_sequence)
    scheme = build_cascade_scheme(c, cfg.h);
  std::vector<int> uncertified;
  std::vector<std::vector<double>> programs(nb);
  ControlFn ctl;
  switch (cfg.scheme) {
    case SchemeKind::consistent:
      ctl = [&](long, const Vec& xm) {
        CascadeControl r = cascade_consistent_control(c, *scheme, xm);
        uncertified = r.uncertified;
        return r.u;
      };
      break;
    case SchemeKind::full_sequence:
      ctl = [&](long k, const Vec& xm) {
        Vec u(m);
        for (std::size_t i = 0; i < nb; ++i) {
          const long ni = static_cast<long>(c.blocks[i].plant.n());
          const SampledScheme& s = scheme->blocks[i];
          if (k % ni == 0)
            programs[i] = full_control_sequence(
                s, xm.segment(c.skeleton.offsets[i], c.skeleton.dims[i]));
          u(static_cast<Eigen::Index>(i)) = programs[i][static_cast<std::size_t>(k % ni)];
        }
        return u;
      };
      break;
    case SchemeKind::explicit_zoh:
      ctl = [&](long, const Vec& xm) {
        Vec u(m);
        for (std::size_t i = 0; i < nb; ++i)
          u(static_cast<Eigen::Index>(i)) =
              eval_control(c.blocks[i],
                           xm.segment(c.skeleton.offsets[i], c.skeleton.dims[i]))(0);
        return u;
      };
      break;
    case SchemeKind::open_loop:
      ctl = [m](long, const Vec&) { return Vec::Zero(m); };
      break;
  }
  NormFn norms = [&](const Vec& x) { return block_norms(c, x); };
  Trajectory tr = run(c.skeleton.plant, cfg, ctl, norms, true);
  tr.fingerprint = design_fingerprint(c);
  tr.uncertified_blocks = uncertified;
  return tr;
}

std::optional<double> settling_time_range(const Trajectory& tr, int offset, int dim,
                                          double threshold) {
  if (tr.diverged || tr.states.empty()) return std::nullopt;
  std::size_t first = tr.states.size();
  for (std::size_t k = tr.states.size(); k-- > 0;) {
    if (tr.states[k].segment(offset, dim).norm() > threshold) break;
    first = k;
  }
  if (first == tr.states.size()) return std::nullopt;
  return tr.times[first];
}

std::optional<double> settling_time(const Trajectory& tr, double threshold) {
  if (tr.states.empty()) return std::nullopt;
  return settling_time_range(tr, 0, static_cast<int>(tr.states.front().size()), threshold);
}

double chattering_index(const Trajectory& tr, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw std::invalid_argument("chattering_index: tail_fraction must lie in (0, 1]");
  if (tr.times.size() < 2) return 0.0;
  const double t0 = tr.times.front(), t1 = tr.times.back();
  const double start = t1 - tail_fraction * (t1 - t0);
  double tv = 0.0;
  double first = t1;
  for (std::size_t k = 1; k < tr.times.size(); ++k) {
    if (tr.times[k - 1] < start - 1e-12 * std::max(1.0, std::abs(start))) continue;
    first = std::min(first, tr.times[k - 1]);
    tv += (tr.controls[k] - tr.controls[k - 1]).norm();
  }
  const double dur = t1 - first;
  return dur > 0.0 ? tv / dur : 0.0;
}

std::vector<IssRow> iss_sweep(const ControllerDesign& d, const SimConfig& base,
                              const std::vector<double>& noise,
                              const std::vector<double>& disturbance, int trials) {
  if (trials < 1) throw std::invalid_argument("iss_sweep: trials must be >= 1");
  std::vector<IssRow> rows;
  for (double q : noise)
    for (double w : disturbance) {
      IssRow r;
      r.noise = q;
      r.disturbance = w;
      r.bounds.assign(static_cast<std::size_t>(trials), 0.0);
      r.hom_bounds.assign(static_cast<std::size_t>(trials), 0.0);
      rows.push_back(std::move(r));
    }
  const std::size_t jobs = rows.size() * static_cast<std::size_t>(trials);
  std::vector<char> div(jobs, 0);
  detail::parallel_for(jobs, [&](std::size_t j) {
    const std::size_t ri = j / static_cast<std::size_t>(trials);
    const std::size_t ti = j % static_cast<std::size_t>(trials);
    SimConfig cfg = base;
    cfg.perturbation.noise = rows[ri].noise;
    cfg.perturbation.disturbance = rows[ri].disturbance;
    cfg.perturbation.seed = base.perturbation.seed + ti;
    const Trajectory tr = simulate(d, cfg);
    double b = 0.0, hb = 0.0;
    if (tr.diverged) {
      b = hb = std::numeric_limits<double>::infinity();
      div[j] = 1;
    } else {
      const double from = 0.8 * tr.times.back();
      for (std::size_t k = 0; k < tr.times.size(); ++k) {
        if (tr.times[k] < from) continue;
        b = std::max(b, tr.states[k].norm());
        hb = std::max(hb, tr.hom_norms[k]);
      }
    }
    rows[ri].bounds[ti] = b;
    rows[ri].hom_bounds[ti] = hb;
  });
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    IssRow& r = rows[ri];
    double sum = 0.0;
    for (std::size_t t = 0; t < r.bounds.size(); ++t) {
      r.max_bound = std::max(r.max_bound, r.bounds[t]);
      r.max_hom_bound = std::max(r.max_hom_bound, r.hom_bounds[t]);
      sum += r.bounds[t];
      r.diverged += div[ri * static_cast<std::size_t>(trials) + t];
    }
    r.mean_bound = sum / static_cast<double>(r.bounds.size());
  }
  return rows;
}

}  // namespace homctl
