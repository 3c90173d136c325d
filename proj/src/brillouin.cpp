#include "fermitherm/brillouin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fermitherm/errors.hpp"
#include "fermitherm/scalar.hpp"

namespace fermitherm {

namespace {

double mean_of(const Symbol& symbol, double (*integrand)(double)) {
  auto values = symbol.real_samples();
  std::transform(values.begin(), values.end(), values.begin(), integrand);
  return integrate_periodic(values);
}

struct Triple {
  double s, e, p;
};

Triple evaluate(const LatticeKernel& h, int grid_n) {
  const Symbol h_symbol = symbol_from_kernel(h, grid_n);
  const Symbol c_symbol = h_symbol.map_real(fermi);
  return {specific_entropy_density(c_symbol), specific_energy_density(h_symbol),
          pressure_density(h_symbol)};
}

}  // namespace

double integrate_periodic(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  // Neumaier summation
  double sum = 0.0;
  double carry = 0.0;
  for (double v : samples) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + carry) / static_cast<double>(samples.size());
}

double specific_entropy_density(const Symbol& cov_symbol) {
  for (double c : cov_symbol.real_samples()) {
    if (!(c > 0.0 && c < 1.0)) {
      throw RangeError("covariance sample " + std::to_string(c) + " outside ]0,1[");
    }
  }
  return mean_of(cov_symbol, binary_entropy);
}

double specific_energy_density(const Symbol& h_symbol) {
  return mean_of(h_symbol, [](double h) { return h * fermi(h); });
}

double pressure_density(const Symbol& h_symbol) { return mean_of(h_symbol, log1p_exp_neg); }

double operator_norm(const Symbol& h_symbol) {
  double norm = 0.0;
  for (double v : h_symbol.real_samples()) norm = std::max(norm, std::abs(v));
  return norm;
}

DensityFunctionals density_functionals(const LatticeKernel& h, int grid_n) {
  const Triple coarse = evaluate(h, grid_n);
  const Triple fine = evaluate(h, 2 * grid_n);

  DensityFunctionals out;
  out.entropy = coarse.s;
  out.energy = coarse.e;
  out.pressure = coarse.p;
  out.grid_n = grid_n;
  out.refinement_gap = std::max({std::abs(coarse.s - fine.s), std::abs(coarse.e - fine.e),
                                 std::abs(coarse.p - fine.p)});

  if (out.entropy < 0.0 || out.entropy > std::numbers::ln2 + 1e-12) {
    throw RangeError("specific entropy " + std::to_string(out.entropy) + " outside [0, log 2]");
  }
  if (out.pressure < 0.0) throw RangeError("negative pressure density");
  const double gap = std::abs(out.pressure - (out.entropy - out.energy));
  if (gap > 1e-10) {
    throw Error("Gibbs variational identity violated by " + std::to_string(gap));
  }
  return out;
}

}  // namespace fermitherm
