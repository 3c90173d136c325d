#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fermitherm/brillouin.hpp"
#include "fermitherm/config.hpp"
#include "fermitherm/finite_volume.hpp"
#include "fermitherm/wiener_algebra.hpp"

namespace fermitherm {

// Covariance kernel, composed h and everything derived from them once per study.
struct SymbolPipeline {
  LatticeKernel covariance;
  double covariance_tail = 0.0;  // nonzero only for families sampled from a symbol
  RegularityReport regularity;
  TruncatedKernel h;
  Symbol h_symbol;
  DensityFunctionals functionals;
};

// Builds the covariance of a config and checks its regularity. NotRegular
// when the symbol leaves ]0,1[.
LatticeKernel build_covariance(const StudyConfig& config, double* tail_mass = nullptr);
SymbolPipeline build_pipeline(const StudyConfig& config);

struct ManyBodyRow {
  double log_c_per_site = 0.0;
  double rel_entropy_exact_per_site = 0.0;
  std::optional<double> maxent_gap;  // optimum - finite entropy, up to maxent.max_sites
};

struct ReportRow {
  VolumeRow one_particle;
  std::optional<ManyBodyRow> many_body;
};

struct EndpointTrend {
  std::string quantity;
  int first_L = 0;
  int last_L = 0;
  double first = 0.0;
  double last = 0.0;
  bool holds = false;  // last <= first, up to 1e-12 of rounding
};

struct ConvergenceReport {
  StudyConfig config;
  DensityFunctionals functionals;
  RegularityReport regularity;
  double h_tail_mass = 0.0;
  std::vector<ReportRow> rows;  // ascending L over the union of both L lists
  std::vector<EndpointTrend> trends;

  double entropy_residual(const ReportRow& row) const;
  double pressure_residual(const ReportRow& row) const;
  double energy_residual(const ReportRow& row) const;
  bool trends_hold() const;
};

// Rows are computed on up to `jobs` threads and assembled in L order, so the
// output does not depend on `jobs`. Errors carry the stage that raised them.
ConvergenceReport run_convergence_study(const StudyConfig& config, int jobs = 1);

// CSV with the fixed header, %.17g numbers and empty cells for missing values.
std::string convergence_csv(const ConvergenceReport& report);
nlohmann::json convergence_sidecar(const ConvergenceReport& report);

// Writes `text` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& text);

struct VariationalCheck {
  double grid_identity = 0.0;          // |p - (s - e)| at grid_n and 2 grid_n
  double finite_bookkeeping = 0.0;     // max_L |(P - S + E)/|L| - rel_entropy_per_site|
  double min_finite_relative = 0.0;    // min_L (P - S + E)/|L|, must be >= 0
  double exact_relative_mismatch = 0.0;  // max over many-body L of |E + P - S - Ent_exact|
  double max_residual() const;
};

VariationalCheck gibbs_variational_check(const StudyConfig& config);

struct MaxEntCase {
  int sites = 0;
  double gaussian_entropy = 0.0;
  double optimal_entropy = 0.0;
  double gap = 0.0;  // optimal - gaussian
  double trace_distance = 0.0;
  int iterations = 0;
  double constraint_residual = 0.0;
  int perturbed_states = 0;
  double max_perturbed_entropy = 0.0;  // -inf when no states were produced
  bool dominated = true;                // every perturbed entropy <= gaussian + 1e-9
};

struct MaxEntReport {
  std::vector<MaxEntCase> cases;
};

// One case per explicit maxent covariance, or per site count using the
// compression of the study covariance onto a segment of that length.
MaxEntReport max_entropy_study(const StudyConfig& config);
std::string maxent_csv(const MaxEntReport& report);

}  // namespace fermitherm
