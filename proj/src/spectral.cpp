#include "fermitherm/spectral.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "fermitherm/errors.hpp"

namespace fermitherm {

IndexSet all_indices(Eigen::Index dim) {
  IndexSet idx(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

std::vector<IndexSet> sector_partition(const Eigen::MatrixXcd& a) {
  const Eigen::Index dim = a.rows();
  const auto udim = static_cast<unsigned long>(dim);
  if (dim < 2 || !std::has_single_bit(udim)) return {all_indices(dim)};
  const int sites = std::countr_zero(udim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const int pj = std::popcount(static_cast<unsigned long>(j));
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (std::popcount(static_cast<unsigned long>(i)) != pj && a(i, j) != 0.0) {
        return {all_indices(dim)};
      }
    }
  }
  std::vector<IndexSet> sectors(static_cast<std::size_t>(sites) + 1);
  for (Eigen::Index i = 0; i < dim; ++i) {
    sectors[std::popcount(static_cast<unsigned long>(i))].push_back(i);
  }
  return sectors;
}

std::vector<IndexSet> common_partition(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  auto pa = sector_partition(a);
  if (pa.size() == 1) return pa;
  auto pb = sector_partition(b);
  return pb.size() == 1 ? pb : pa;
}

Eigen::MatrixXcd extract_block(const Eigen::MatrixXcd& a, const IndexSet& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = a(idx[i], idx[j]);
  }
  return out;
}

HermitianSpectrum::HermitianSpectrum(const Eigen::MatrixXcd& a)
    : HermitianSpectrum(a, sector_partition(a)) {}

HermitianSpectrum::HermitianSpectrum(const Eigen::MatrixXcd& a, std::vector<IndexSet> partition)
    : dim_(a.rows()) {
  if (a.rows() != a.cols()) throw DimensionMismatch("spectrum of a non-square matrix");
  blocks_.reserve(partition.size());
  for (auto& idx : partition) {
    if (idx.empty()) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(extract_block(a, idx));
    if (solver.info() != Eigen::Success) throw EigensolveFailure("Hermitian eigensolve failed");
    blocks_.push_back({std::move(idx), solver.eigenvalues(), solver.eigenvectors()});
  }
}

Eigen::VectorXd HermitianSpectrum::eigenvalues() const {
  Eigen::VectorXd all(dim_);
  Eigen::Index k = 0;
  for (const auto& b : blocks_) {
    all.segment(k, b.values.size()) = b.values;
    k += b.values.size();
  }
  std::sort(all.data(), all.data() + all.size());
  return all;
}

double HermitianSpectrum::min_eigenvalue() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks_) m = std::min(m, b.values.minCoeff());
  return m;
}

double HermitianSpectrum::max_eigenvalue() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& b : blocks_) m = std::max(m, b.values.maxCoeff());
  return m;
}

Eigen::MatrixXcd HermitianSpectrum::apply(const std::function<double(double)>& f) const {
  return apply_complex([&f](double x) { return std::complex<double>(f(x), 0.0); });
}

Eigen::MatrixXcd HermitianSpectrum::apply_complex(
    const std::function<std::complex<double>(double)>& f) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (const auto& b : blocks_) {
    Eigen::VectorXcd fd(b.values.size());
    for (Eigen::Index i = 0; i < b.values.size(); ++i) fd(i) = f(b.values(i));
    const Eigen::MatrixXcd block = b.vectors * fd.asDiagonal() * b.vectors.adjoint();
    const auto n = static_cast<Eigen::Index>(b.indices.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) out(b.indices[i], b.indices[j]) = block(i, j);
    }
  }
  return out;
}

}  // namespace fermitherm
