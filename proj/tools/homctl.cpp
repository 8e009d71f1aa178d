// homctl: design, certify, simulate and compare homogeneous controllers.
//
// Exit codes: 0 ok, 1 usage or parse error, 2 domain failure (synthesis,
// invalid design, divergence).

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "homctl/io.hpp"
#include "parallel.hpp"

namespace fs = std::filesystem;
using namespace homctl;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDomain = 2;

using AnyDesign = std::variant<ControllerDesign, CascadeDesign>;

struct Args {
  std::string config, design, out = ".";
  std::vector<double> mu, rho;
  int grid = 1000;
  int kstar = 1;
  std::uint64_t seed = 0;
  std::string scheme = "consistent";
  std::vector<std::string> schemes;
  std::vector<double> hs;
  double h = 0.05;
  double t_final = 10.0;
  std::vector<double> x0;
  double noise = 0.0, disturbance = 0.0;
  int substeps = 16;
  double threshold = 1e-9;
  double tail = 0.2;
};

fs::path out_dir(const Args& a) {
  fs::path p(a.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory '" + a.out + "': " + ec.message());
  return p;
}

AnyDesign load_any(const std::string& path) {
  const json j = read_json_file(path);
  const std::string kind = document_kind(j);
  if (kind == "cascade") return cascade_from_json(j);
  if (kind == "design") return design_from_json(j);
  throw ConfigError(path + ": unknown document kind '" + kind + "'");
}

Trajectory run_sim(const AnyDesign& d, const SimConfig& cfg) {
  return std::visit([&](const auto& x) { return simulate(x, cfg); }, d);
}

Eigen::Index state_dim(const AnyDesign& d) {
  if (const auto* s = std::get_if<ControllerDesign>(&d)) return s->plant.n();
  return std::get<CascadeDesign>(d).skeleton.plant.n();
}

SimConfig sim_config(const Args& a, const AnyDesign& d, SchemeKind kind, double h) {
  SimConfig c;
  c.scheme = kind;
  c.h = h;
  c.t_final = a.t_final;
  const Eigen::Index n = state_dim(d);
  if (a.x0.empty()) {
    c.x0 = Vec::Zero(n);
    c.x0(0) = 1.0;
  } else {
    if (static_cast<Eigen::Index>(a.x0.size()) != n)
      throw ConfigError("--x0 has " + std::to_string(a.x0.size()) + " entries, state has " +
                        std::to_string(n));
    c.x0 = Eigen::Map<const Vec>(a.x0.data(), n);
  }
  c.perturbation.noise = a.noise;
  c.perturbation.disturbance = a.disturbance;
  c.perturbation.seed = a.seed;
  c.substeps = a.substeps;
  return c;
}

double peak_control(const Trajectory& tr) {
  double p = 0.0;
  for (const auto& u : tr.controls) p = std::max(p, u.norm());
  return p;
}

json metrics(const Trajectory& tr, const AnyDesign& d, const Args& a) {
  json m;
  const auto st = settling_time(tr, a.threshold);
  m["settling_time"] = st ? json(*st) : json(nullptr);
  m["settling_threshold"] = a.threshold;
  m["chattering_index"] = chattering_index(tr, a.tail);
  m["tail_fraction"] = a.tail;
  m["final_norm"] = tr.states.empty() ? 0.0 : tr.states.back().norm();
  m["peak_control"] = peak_control(tr);
  m["diverged"] = tr.diverged;
  if (!tr.note.empty()) m["note"] = tr.note;
  if (const auto* c = std::get_if<CascadeDesign>(&d)) {
    json blocks = json::array();
    for (std::size_t i = 0; i < c->blocks.size(); ++i) {
      const auto bs = settling_time_range(tr, c->skeleton.offsets[i], c->skeleton.dims[i],
                                          a.threshold);
      blocks.push_back({{"block", i + 1}, {"settling_time", bs ? json(*bs) : json(nullptr)}});
    }
    m["blocks"] = blocks;
  }
  return m;
}

int cmd_design(const Args& a) {
  const PlantConfig pc = plant_config_from_json(read_json_file(a.config));
  std::vector<double> mu = a.mu.empty() ? pc.mu : a.mu;
  std::vector<double> rho = a.rho.empty() ? pc.rho : a.rho;
  const fs::path dir = out_dir(a);
  json doc;
  if (pc.is_cascade()) {
    const CascadeSkeleton sk = decompose(pc.plant.A, pc.plant.B, pc.block_dims);
    doc = cascade_to_json(cascade_design(sk, mu, rho));
  } else {
    if (mu.size() != 1 || rho.size() != 1)
      throw ConfigError("single-input design takes one --mu and one --rho");
    doc = design_to_json(build_controller(pc.plant, mu[0], rho[0]));
  }
  const fs::path file = dir / "design.json";
  write_text_file(file.string(), doc.dump(2) + "\n");
  std::cout << "wrote " << file.string() << "\n";
  return kOk;
}

void write_certificate(const fs::path& dir, const std::string& stem, const CertificateReport& r) {
  write_text_file((dir / (stem + ".json")).string(), certificate_to_json(r).dump(2) + "\n");
  std::ostringstream csv;
  write_certificate_csv(csv, r);
  write_text_file((dir / (stem + ".csv")).string(), csv.str());
  std::cout << stem << ": " << (r.pass ? "pass" : "fail") << " (min " << r.metric << " = "
            << r.min_value << ", r* = " << r.radii.r_star << ")\n";
}

int cmd_certify(const Args& a) {
  const AnyDesign d = load_any(a.design);
  CertifyOptions opt;
  opt.grid_size = a.grid;
  opt.k_star = a.kstar;
  const fs::path dir = out_dir(a);
  bool all = true;
  if (const auto* s = std::get_if<ControllerDesign>(&d)) {
    const CertificateReport r = certify(*s, opt);
    write_certificate(dir, "certificate", r);
    all = r.pass;
  } else {
    const auto& c = std::get<CascadeDesign>(d);
    for (std::size_t i = 0; i < c.blocks.size(); ++i) {
      const CertificateReport r = certify(c.blocks[i], opt);
      write_certificate(dir, "certificate_block" + std::to_string(i + 1), r);
      all = all && r.pass;
    }
  }
  // A failed certificate is a result, not an error.
  (void)all;
  return kOk;
}

int cmd_simulate(const Args& a) {
  const AnyDesign d = load_any(a.design);
  const SimConfig cfg = sim_config(a, d, parse_scheme(a.scheme), a.h);
  const fs::path dir = out_dir(a);
  const Trajectory tr = run_sim(d, cfg);
  std::ostringstream csv;
  write_trajectory_csv(csv, tr);
  write_text_file((dir / "trajectory.csv").string(), csv.str());
  write_text_file((dir / "trajectory.json").string(), trajectory_metadata(tr).dump(2) + "\n");
  const json m = metrics(tr, d, a);
  write_text_file((dir / "metrics.json").string(), m.dump(2) + "\n");
  std::cout << m.dump() << "\n";
  if (tr.diverged) {
    std::cerr << "homctl: simulation aborted: " << tr.note << "\n";
    return kDomain;
  }
  return kOk;
}

int cmd_compare(const Args& a) {
  const AnyDesign d = load_any(a.design);
  std::vector<std::string> schemes = a.schemes.empty() ? std::vector<std::string>{a.scheme}
                                                       : a.schemes;
  std::vector<double> hs = a.hs.empty() ? std::vector<double>{a.h} : a.hs;
  std::vector<std::pair<std::string, double>> rows;
  for (const auto& s : schemes) {
    parse_scheme(s);
    for (double h : hs) rows.emplace_back(s, h);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  const fs::path dir = out_dir(a);
  std::ostringstream csv;
  csv << "scheme,h,settling_time,chattering_index,final_norm,peak_control\n";
  // Rows are independent; each fills its own slot and the table is joined in order.
  std::vector<std::string> lines(rows.size());
  detail::parallel_for(rows.size(), [&](std::size_t i) {
    const auto& [s, h] = rows[i];
    const Trajectory tr = run_sim(d, sim_config(a, d, parse_scheme(s), h));
    const auto st = settling_time(tr, a.threshold);
    const double final_norm =
        tr.diverged ? std::numeric_limits<double>::infinity() : tr.states.back().norm();
    lines[i] = s + "," + decimal_string(h) + "," + (st ? decimal_string(*st) : std::string()) + "," +
               decimal_string(chattering_index(tr, a.tail)) + "," + decimal_string(final_norm) + "," +
               decimal_string(peak_control(tr)) + "\n";
  });
  for (const auto& l : lines) csv << l;
  write_text_file((dir / "compare.csv").string(), csv.str());
  std::cout << csv.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogeneous controller synthesis, certification and sampled-data simulation"};
  app.require_subcommand(1);
  // --h is the sampling period, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  Args a;

  auto* design = app.add_subcommand("design", "Synthesize gains from a plant config");
  design->add_option("config", a.config, "Plant config JSON")->required()->check(CLI::ExistingFile);
  design->add_option("--mu", a.mu, "Homogeneity degree(s), overrides the config")->delimiter(',');
  design->add_option("--rho", a.rho, "Convergence rate(s), overrides the config")->delimiter(',');
  design->add_option("--out", a.out, "Output directory");

  auto* cert = app.add_subcommand("certify", "Grid certificate of the consistent scheme");
  cert->add_option("design", a.design, "Design JSON")->required()->check(CLI::ExistingFile);
  cert->add_option("--grid", a.grid, "Grid size")->check(CLI::Range(2, 10000000));
  cert->add_option("--kstar", a.kstar, "Steps k* (k* > 1 is sampled)")->check(CLI::Range(1, 1000));
  cert->add_option("--out", a.out, "Output directory");

  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("design", a.design, "Design JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--T", a.t_final, "Horizon")->check(CLI::PositiveNumber);
    sub->add_option("--x0", a.x0, "Initial state, comma separated")->delimiter(',');
    sub->add_option("--seed", a.seed, "Perturbation seed");
    sub->add_option("--noise", a.noise, "Measurement noise bound")->check(CLI::NonNegativeNumber);
    sub->add_option("--disturbance", a.disturbance, "Disturbance bound")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--substeps", a.substeps, "Disturbance sub-steps")->check(CLI::PositiveNumber);
    sub->add_option("--threshold", a.threshold, "Settling threshold")->check(CLI::PositiveNumber);
    sub->add_option("--tail", a.tail, "Chattering tail fraction")->check(CLI::Range(1e-9, 1.0));
    sub->add_option("--out", a.out, "Output directory");
  };
  auto* sim = app.add_subcommand("simulate", "Closed-loop sampled-data run");
  add_sim(sim);
  sim->add_option("--scheme", a.scheme, "consistent | full_sequence | explicit | open_loop");
  sim->add_option("--h", a.h, "Sampling period")->check(CLI::PositiveNumber);

  auto* cmp = app.add_subcommand("compare", "Scheme x step comparison table");
  add_sim(cmp);
  cmp->add_option("--scheme", a.schemes, "Schemes, comma separated")->delimiter(',');
  cmp->add_option("--h", a.hs, "Sampling periods, comma separated")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*design) return cmd_design(a);
    if (*cert) return cmd_certify(a);
    if (*sim) return cmd_simulate(a);
    if (*cmp) return cmd_compare(a);
  } catch (const ConfigError& e) {
    std::cerr << "homctl: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "homctl: " << e.what() << "\n";
    return kUsage;
  } catch (const Uncontrollable& e) {
    std::cerr << "homctl: rank defect " << e.required() - e.rank() << ": " << e.what() << "\n";
    return kDomain;
  } catch (const std::exception& e) {
    std::cerr << "homctl: " << e.what() << "\n";
    return kDomain;
  }
  return kUsage;
}
