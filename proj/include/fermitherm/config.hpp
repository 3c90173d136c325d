#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fermitherm/defaults.hpp"
#include "fermitherm/wiener_algebra.hpp"
#include "json.hpp"

namespace fermitherm {

// Covariance families:
//   constant     C = c delta_0
//   trig         1/2 + a sum_j cos k_j
//   fermi_dirac  1 / (1 + e^{beta (eps(k) - mu)}), eps(k) = -2 sum_j cos k_j
//   kernel       explicit LatticeKernel JSON
struct CovarianceSpec {
  enum class Family { Constant, Trig, FermiDirac, Kernel };
  Family family = Family::Trig;
  double c = 0.5;
  double a = 0.25;
  double beta = 1.0;
  double mu = 0.0;
  std::optional<LatticeKernel> kernel;
};

struct MaxEntSettings {
  double tol = defaults::kMaxEntTol;
  int max_iter = defaults::kMaxEntMaxIter;
  std::vector<int> site_counts = defaults::maxent_site_counts();
  int perturbed_states = defaults::kPerturbedStates;
  std::uint64_t seed = defaults::kSeed;
  int max_sites = defaults::kMaxEntMaxSites;
  // Explicit covariance matrices; when non-empty they replace site_counts.
  std::vector<Eigen::MatrixXcd> covariances;
};

struct StudyConfig {
  CovarianceSpec covariance;
  int dimension = 1;
  int grid_n = 0;   // 0 means defaults::grid_n(dimension)
  int radius = -1;  // -1 means defaults::radius(dimension)
  double tail_tol = defaults::kTailTol;
  std::vector<int> one_particle_L = defaults::one_particle_L();
  std::vector<int> many_body_L = defaults::many_body_L();
  int fock_cap = defaults::kFockCap;
  double im_z = defaults::kImZ;
  MaxEntSettings maxent;
  std::string output = "study";  // file stem inside the output directory
};

// Parses the schema documented in the README. Unknown keys, wrong types and
// invalid values raise ConfigError; many-body boxes above fock_cap raise
// BoxTooLarge.
StudyConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const StudyConfig& config);

// Checks every invariant of a parsed config; config_from_json calls it.
void validate(const StudyConfig& config);

// Applies `key=value` with a dotted key path to a JSON document. The value is
// read as JSON when it parses, otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

nlohmann::json load_json_file(const std::string& path);

}  // namespace fermitherm
