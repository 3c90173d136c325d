#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

namespace fermitherm {

using Complex = std::complex<double>;

// A point of Z^d. std::vector ordering gives the lexicographic order used for
// every accumulation over kernel entries.
using Offset = std::vector<int>;

int max_norm(const Offset& x);

// Finitely supported function on Z^d, the matrix entries K(x - y) of a
// translation-invariant operator on l^2(Z^d).
class LatticeKernel {
 public:
  using Entries = std::map<Offset, Complex>;

  // Validates that every offset has `dimension` components and max-norm at
  // most `radius`.
  LatticeKernel(int dimension, int radius, Entries entries);

  // K = c * delta_0.
  static LatticeKernel constant(int dimension, Complex c);

  int dimension() const { return dimension_; }
  int radius() const { return radius_; }
  const Entries& entries() const { return entries_; }

  // Zero for offsets that are not stored.
  Complex at(const Offset& x) const;

  // Exact scan: K(-x) == conj(K(x)) for every stored x.
  bool is_hermitian() const;

  // Values on the cube [-R, R]^d, flattened with the first axis slowest.
  std::vector<Complex> dense_window() const;

 private:
  int dimension_;
  int radius_;
  Entries entries_;
};

void to_json(nlohmann::json& j, const LatticeKernel& kernel);
LatticeKernel kernel_from_json(const nlohmann::json& j);

// Samples of a function on the Brillouin zone at k_j = 2 pi m_j / N - pi,
// m_j = 0..N-1, flattened with the first axis slowest.
class Symbol {
 public:
  Symbol(int dimension, int grid_n, std::vector<Complex> samples,
         std::optional<int> source_radius = std::nullopt);

  static Symbol from_function(int dimension, int grid_n,
                              const std::function<double(std::span<const double>)>& f);

  int dimension() const { return dimension_; }
  int grid_n() const { return grid_n_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<Complex>& samples() const { return samples_; }
  std::optional<int> source_radius() const { return source_radius_; }

  // True when every sample has an exactly zero imaginary part.
  bool is_real() const;
  // Throws RangeError unless is_real().
  std::vector<double> real_samples() const;

  // Pointwise image of the real samples under f.
  Symbol map_real(const std::function<double(double)>& f) const;

  std::vector<double> momentum(std::size_t flat_index) const;
  static double grid_momentum(int m, int grid_n);

 private:
  int dimension_;
  int grid_n_;
  std::vector<Complex> samples_;
  std::optional<int> source_radius_;
};

struct TruncatedKernel {
  LatticeKernel kernel;
  // Sum of |K(x)| over grid offsets outside the retained radius.
  double tail_mass;
};

struct RegularityReport {
  double min_value = 0.0;
  double max_value = 0.0;
  double l1_norm = 0.0;
  double margin = 0.0;
  bool is_regular = false;
};

// Fourier series sum_x K(x) e^{-i k.x} on the grid. Requires
// grid_n >= 2 * radius + 2 (AliasingError otherwise). Symbols of Hermitian
// kernels are real: imaginary rounding residue is verified and dropped.
Symbol symbol_from_kernel(const LatticeKernel& kernel, int grid_n);

// Inverse DFT restricted to max-norm <= radius. Throws TailToleranceExceeded
// when the mass of the discarded coefficients exceeds tail_tol. Real symbols
// yield exactly Hermitian kernels.
TruncatedKernel kernel_from_symbol(const Symbol& symbol, int radius, double tail_tol);

LatticeKernel convolve(const LatticeKernel& a, const LatticeKernel& b);

double l1_norm(const LatticeKernel& kernel);

RegularityReport check_regularity(const LatticeKernel& kernel, int grid_n);

// h with symbol log((1 - C(k)) / C(k)), so that C = (1 + e^h)^{-1}.
TruncatedKernel compose_wiener_levy(const LatticeKernel& cov, int grid_n, int radius,
                                    double tail_tol);

}  // namespace fermitherm
