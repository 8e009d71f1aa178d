#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "homctl/discretization.hpp"
#include "homctl/mimo.hpp"
#include "homctl/simulator.hpp"

namespace homctl {

using json = nlohmann::json;

/// Malformed or incomplete configuration documents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDocumentVersion = 1;

json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j, const std::string& field);

/// Shortest decimal string that reads back to the same double.
std::string decimal_string(double v);
/// Accepts a JSON number or a decimal string.
double number_from_json(const json& j, const std::string& field);

/// Plant configuration: {version, A, B, mu, rho} or, for cascades,
/// {version, A, B, block_dims, mu: [...], rho: [...]}.
struct PlantConfig {
  Plant plant;
  std::vector<int> block_dims;  // empty for single-input designs
  std::vector<double> mu;
  std::vector<double> rho;
  bool is_cascade() const { return !block_dims.empty(); }
};

PlantConfig plant_config_from_json(const json& j);

json design_to_json(const ControllerDesign& d);
/// Rebuilds the design from G0, Y0, Gd, X, Y and re-checks every invariant
/// (InvariantViolation / NotPositiveDefinite on failure).
ControllerDesign design_from_json(const json& j);

json cascade_to_json(const CascadeDesign& c);
CascadeDesign cascade_from_json(const json& j);

/// "design" or "cascade"
std::string document_kind(const json& j);

json certificate_to_json(const CertificateReport& r);
void write_certificate_csv(std::ostream& os, const CertificateReport& r);

void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
json trajectory_metadata(const Trajectory& tr);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace homctl
