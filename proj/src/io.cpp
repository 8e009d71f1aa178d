#include "homctl/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace homctl {

namespace {

const json& field(const json& j, const std::string& key) {
  if (!j.is_object()) throw ConfigError("expected a JSON object while reading '" + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing field '" + key + "'");
  return *it;
}

void check_version(const json& j) {
  const json& v = field(j, "version");
  if (!v.is_number_integer() || v.get<int>() != kDocumentVersion)
    throw ConfigError("unsupported document version " + v.dump() + " (expected " +
                      std::to_string(kDocumentVersion) + ")");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::vector<double> number_list(const json& j, const std::string& name) {
  std::vector<double> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(number_from_json(j[i], name + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(number_from_json(j, name));
  }
  return out;
}

}  // namespace

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Mat matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    throw ConfigError("'" + name + "' must be a non-empty array of rows");
  const std::size_t rows = j.size(), cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError("'" + name + "' row " + std::to_string(r) + " has the wrong length");
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = number_from_json(j[r][c], name);
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return m;
}

std::string decimal_string(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double number_from_json(const json& j, const std::string& name) {
  double v = 0.0;
  if (j.is_number()) {
    v = j.get<double>();
  } else if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
      throw ConfigError("'" + name + "': cannot parse \"" + s + "\" as a number");
  } else {
    throw ConfigError("'" + name + "' must be a number or a decimal string");
  }
  if (!std::isfinite(v)) throw ConfigError("'" + name + "' is not finite");
  return v;
}

PlantConfig plant_config_from_json(const json& j) {
  check_version(j);
  PlantConfig pc;
  pc.plant.A = matrix_from_json(field(j, "A"), "A");
  pc.plant.B = matrix_from_json(field(j, "B"), "B");
  pc.mu = number_list(field(j, "mu"), "mu");
  pc.rho = number_list(field(j, "rho"), "rho");
  if (j.contains("block_dims")) {
    const json& bd = j["block_dims"];
    if (!bd.is_array()) throw ConfigError("'block_dims' must be an array of integers");
    for (const auto& e : bd) {
      if (!e.is_number_integer()) throw ConfigError("'block_dims' must hold integers");
      pc.block_dims.push_back(e.get<int>());
    }
  }
  if (!pc.is_cascade() && (pc.mu.size() != 1 || pc.rho.size() != 1))
    throw ConfigError("single-input plant config needs scalar 'mu' and 'rho'");
  return pc;
}

json design_to_json(const ControllerDesign& d) {
  const InvariantReport inv = check_invariants(d);
  json j;
  j["version"] = kDocumentVersion;
  j["kind"] = "design";
  j["plant"] = {{"A", matrix_to_json(d.plant.A)}, {"B", matrix_to_json(d.plant.B)}};
  j["mu"] = decimal_string(d.mu);
  j["rho"] = decimal_string(d.rho);
  j["n_tilde"] = d.n_tilde;
  j["G0"] = matrix_to_json(d.G0);
  j["Y0"] = matrix_to_json(d.Y0);
  j["Gd"] = matrix_to_json(d.Gd);
  j["X"] = matrix_to_json(d.X.mat());
  j["Y"] = matrix_to_json(d.Y);
  j["K0"] = matrix_to_json(d.K0);
  j["K"] = matrix_to_json(d.K);
  j["P"] = matrix_to_json(d.P.mat());
  j["residuals"] = {{"generator", inv.generator_residual},
                    {"G0B", inv.g0b_residual},
                    {"homogeneity", inv.homogeneity_residual},
                    {"GdB", inv.gdb_residual},
                    {"lmi_equality", inv.lmi_residual},
                    {"gains", inv.gain_residual},
                    {"skew", inv.skew_residual},
                    {"lambda_min_X", inv.lambda_min_x},
                    {"lambda_min_GdX", inv.lambda_min_gx}};
  j["solver"] = {{"projection_iterations", d.diagnostics.projection_iterations},
                 {"newton_iterations", d.diagnostics.newton_iterations},
                 {"free_dimension", d.diagnostics.free_dimension},
                 {"equality_residual", d.diagnostics.equality_residual},
                 {"margin_X", d.diagnostics.margin_x},
                 {"margin_GdX", d.diagnostics.margin_gx}};
  return j;
}

ControllerDesign design_from_json(const json& j) {
  check_version(j);
  const json& p = field(j, "plant");
  Plant plant{matrix_from_json(field(p, "A"), "plant.A"),
              matrix_from_json(field(p, "B"), "plant.B")};
  const double mu = number_from_json(field(j, "mu"), "mu");
  const double rho = number_from_json(field(j, "rho"), "rho");
  const Mat Xm = matrix_from_json(field(j, "X"), "X");
  if (Xm.rows() != Xm.cols()) throw ConfigError("'X' must be square");
  // Stored X is symmetric up to its own rounding; reject clearly asymmetric data.
  if ((Xm - Xm.transpose()).cwiseAbs().maxCoeff() > 1e-9 * Xm.cwiseAbs().maxCoeff())
    throw ConfigError("'X' is not symmetric");
  ControllerDesign d;
  try {
    d = assemble_design(plant, mu, rho, matrix_from_json(field(j, "G0"), "G0"),
                        matrix_from_json(field(j, "Y0"), "Y0"),
                        matrix_from_json(field(j, "Gd"), "Gd"), SymMat::symmetrized(Xm),
                        matrix_from_json(field(j, "Y"), "Y"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("design document: ") + e.what());
  }
  d.n_tilde = j.contains("n_tilde") && j["n_tilde"].is_number_integer()
                  ? j["n_tilde"].get<int>()
                  : controllability_index(plant);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    d.diagnostics.projection_iterations = s.value("projection_iterations", 0);
    d.diagnostics.newton_iterations = s.value("newton_iterations", 0);
    d.diagnostics.free_dimension = s.value("free_dimension", 0);
    d.diagnostics.equality_residual = s.value("equality_residual", 0.0);
    d.diagnostics.margin_x = s.value("margin_X", 0.0);
    d.diagnostics.margin_gx = s.value("margin_GdX", 0.0);
  }
  require_invariants(d);
  return d;
}

json cascade_to_json(const CascadeDesign& c) {
  json j;
  j["version"] = kDocumentVersion;
  j["kind"] = "cascade";
  j["plant"] = {{"A", matrix_to_json(c.skeleton.plant.A)},
                {"B", matrix_to_json(c.skeleton.plant.B)}};
  j["block_dims"] = c.skeleton.dims;
  json couplings = json::array();
  const auto& off = c.skeleton.offsets;
  const auto& dims = c.skeleton.dims;
  for (std::size_t i = 0; i < dims.size(); ++i)
    for (std::size_t k = i + 1; k < dims.size(); ++k) {
      const Mat blk = c.skeleton.plant.A.block(off[i], off[k], dims[i], dims[k]);
      if (blk.cwiseAbs().maxCoeff() == 0.0) continue;
      couplings.push_back({{"row", i + 1}, {"col", k + 1}, {"A", matrix_to_json(blk)}});
    }
  j["couplings"] = couplings;
  json blocks = json::array();
  for (const auto& b : c.blocks) blocks.push_back(design_to_json(b));
  j["blocks"] = blocks;
  return j;
}

CascadeDesign cascade_from_json(const json& j) {
  check_version(j);
  const json& p = field(j, "plant");
  const Mat A = matrix_from_json(field(p, "A"), "plant.A");
  const Mat B = matrix_from_json(field(p, "B"), "plant.B");
  std::vector<int> dims;
  for (const auto& e : field(j, "block_dims")) {
    if (!e.is_number_integer()) throw ConfigError("'block_dims' must hold integers");
    dims.push_back(e.get<int>());
  }
  CascadeDesign c;
  try {
    c.skeleton = decompose(A, B, dims);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("cascade document: ") + e.what());
  }
  const json& blocks = field(j, "blocks");
  if (!blocks.is_array() || blocks.size() != dims.size())
    throw ConfigError("'blocks' must hold one design per block");
  bool neg = false, pos = false;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    ControllerDesign d = design_from_json(blocks[i]);
    const Plant& expect = c.skeleton.blocks[i];
    if (d.plant.A.rows() != expect.A.rows() || (d.plant.A - expect.A).norm() != 0.0 ||
        (d.plant.B - expect.B).norm() != 0.0)
      throw ConfigError("block " + std::to_string(i + 1) +
                        " design does not match the plant's diagonal block");
    neg = neg || d.mu < 0.0;
    pos = pos || d.mu > 0.0;
    c.blocks.push_back(std::move(d));
  }
  if (neg && pos) throw InvariantViolation("cascade blocks mix signs of mu");
  c.certified.assign(c.blocks.size(), std::nullopt);
  return c;
}

std::string document_kind(const json& j) {
  if (!j.is_object()) throw ConfigError("document must be a JSON object");
  return j.value("kind", std::string("design"));
}

json certificate_to_json(const CertificateReport& r) {
  json j;
  j["version"] = kDocumentVersion;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["metric"] = r.metric;
  j["sampled"] = r.sampled;
  j["k_star"] = r.k_star;
  j["margin"] = r.margin;
  j["mu"] = decimal_string(r.mu);
  j["rho"] = decimal_string(r.rho);
  j["min_value"] = std::isfinite(r.min_value) ? json(r.min_value) : json(nullptr);
  j["radii"] = {{"hat_h", r.radii.hat_h},
                {"r_star", r.radii.r_star},
                {"r_lower_minus", optional_number(r.radii.r_lower_minus)},
                {"r_upper_plus", optional_number(r.radii.r_upper_plus)},
                {"r_upper_minus_empirical", optional_number(r.radii.r_upper_minus)}};
  j["h_max"] = optional_number(r.h_max);
  json vals = json::array();
  for (double v : r.values) vals.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  j["grid"] = r.grid;
  j["values"] = vals;
  return j;
}

void write_certificate_csv(std::ostream& os, const CertificateReport& r) {
  os << "delta," << (r.metric.empty() ? "lambda_min" : r.metric) << "\n";
  for (std::size_t i = 0; i < r.grid.size(); ++i)
    os << fmt17(r.grid[i]) << "," << fmt17(r.values[i]) << "\n";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  const Eigen::Index n = tr.states.empty() ? tr.config.x0.size() : tr.states.front().size();
  const Eigen::Index m = tr.controls.empty() ? 0 : tr.controls.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) os << ",u" << i + 1;
  os << ",hom_norm\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << fmt17(tr.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) os << "," << fmt17(tr.states[k](i));
    for (Eigen::Index i = 0; i < m; ++i) os << "," << fmt17(tr.controls[k](i));
    os << "," << fmt17(tr.hom_norms[k]) << "\n";
  }
}

json trajectory_metadata(const Trajectory& tr) {
  json j;
  j["version"] = kDocumentVersion;
  j["scheme"] = to_string(tr.config.scheme);
  j["h"] = decimal_string(tr.config.h);
  j["t_final"] = decimal_string(tr.config.t_final);
  std::vector<double> x0(tr.config.x0.data(), tr.config.x0.data() + tr.config.x0.size());
  j["x0"] = x0;
  j["substeps"] = tr.config.substeps;
  j["perturbation"] = {{"disturbance", tr.config.perturbation.disturbance},
                       {"noise", tr.config.perturbation.noise},
                       {"seed", tr.config.perturbation.seed},
                       {"modes", tr.config.perturbation.modes}};
  j["design_fingerprint"] = tr.fingerprint;
  j["samples"] = tr.times.size();
  j["diverged"] = tr.diverged;
  if (!tr.note.empty()) j["note"] = tr.note;
  if (!tr.uncertified_blocks.empty()) j["uncertified_blocks"] = tr.uncertified_blocks;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace homctl
