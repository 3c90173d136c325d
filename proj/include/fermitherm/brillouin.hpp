#pragma once

#include <span>

#include "fermitherm/wiener_algebra.hpp"

namespace fermitherm {

// Infinite-volume densities of the quasi-free state with one-particle
// Hamiltonian h, evaluated by the periodic trapezoid rule.
struct DensityFunctionals {
  double entropy = 0.0;   // s, nats per site
  double energy = 0.0;    // e, energy per site
  double pressure = 0.0;  // p, nats per site
  int grid_n = 0;
  // max over (s, e, p) of |value(N) - value(2N)|
  double refinement_gap = 0.0;
};

// (1/N^d) sum_k f(k), compensated summation in grid order.
double integrate_periodic(std::span<const double> samples);

// -int (C log C + (1 - C) log(1 - C)) dk/(2 pi)^d. RangeError if any sample
// is outside ]0,1[.
double specific_entropy_density(const Symbol& cov_symbol);

// int h / (1 + e^h) dk/(2 pi)^d.
double specific_energy_density(const Symbol& h_symbol);

// int log(1 + e^{-h}) dk/(2 pi)^d.
double pressure_density(const Symbol& h_symbol);

// sup_k |h(k)| over the grid.
double operator_norm(const Symbol& h_symbol);

// s, e, p at grid_n with C = 1/(1 + e^h) taken pointwise from the symbol of
// h, plus the refinement gap against 2 grid_n. Checks 0 <= s <= log 2,
// p >= 0 and |p - (s - e)| <= 1e-10.
DensityFunctionals density_functionals(const LatticeKernel& h, int grid_n);

}  // namespace fermitherm
