#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace fermitherm {

using IndexSet = std::vector<Eigen::Index>;

// {0, 1, ..., dim - 1} as the single block of a partition.
IndexSet all_indices(Eigen::Index dim);

// Particle-number sectors of a 2^n-dimensional Fock space when `a` has exact
// zeros between sectors; otherwise a single block holding every index.
std::vector<IndexSet> sector_partition(const Eigen::MatrixXcd& a);

// Finest partition valid for both matrices.
std::vector<IndexSet> common_partition(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

Eigen::MatrixXcd extract_block(const Eigen::MatrixXcd& a, const IndexSet& idx);

// Eigendecomposition of a Hermitian matrix, computed block by block over
// sector_partition(a).
class HermitianSpectrum {
 public:
  explicit HermitianSpectrum(const Eigen::MatrixXcd& a);
  HermitianSpectrum(const Eigen::MatrixXcd& a, std::vector<IndexSet> partition);

  Eigen::Index dim() const { return dim_; }
  Eigen::VectorXd eigenvalues() const;  // ascending
  double min_eigenvalue() const;
  double max_eigenvalue() const;

  // V f(D) V^dagger.
  Eigen::MatrixXcd apply(const std::function<double(double)>& f) const;
  Eigen::MatrixXcd apply_complex(const std::function<std::complex<double>(double)>& f) const;

 private:
  struct Block {
    IndexSet indices;
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
  };
  Eigen::Index dim_;
  std::vector<Block> blocks_;
};

}  // namespace fermitherm
