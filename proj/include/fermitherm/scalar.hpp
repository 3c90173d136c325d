#pragma once

#include <cmath>

namespace fermitherm {

// Binary entropy -x log x - (1 - x) log(1 - x) for x in ]0,1[.
inline double binary_entropy(double x) { return -x * std::log(x) - (1.0 - x) * std::log1p(-x); }

// log(1 + e^{-x}) without overflow for large |x|.
inline double log1p_exp_neg(double x) {
  return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

// Fermi function 1 / (1 + e^x).
inline double fermi(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

// log((1 - c) / c), the inverse of fermi on ]0,1[.
inline double logit_complement(double c) { return std::log1p(-c) - std::log(c); }

}  // namespace fermitherm
