#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fermitherm/brillouin.hpp"
#include "fermitherm/wiener_algebra.hpp"

namespace fermitherm {

// Centered cube [-L, L]^d with its sites in lexicographic order.
class Box {
 public:
  Box(int dimension, int half_width);

  int dimension() const { return dimension_; }
  int half_width() const { return half_width_; }
  std::size_t size() const { return sites_.size(); }
  const std::vector<Offset>& sites() const { return sites_; }

  bool contains(const Offset& x) const;
  std::optional<std::size_t> index_of(const Offset& x) const;

 private:
  int dimension_;
  int half_width_;
  std::vector<Offset> sites_;
};

// Dense one-particle operator on l^2(box), Hermitian within 1e-12.
class HermitianMatrix {
 public:
  HermitianMatrix(Box box, Eigen::MatrixXcd values);

  const Box& box() const { return box_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  std::size_t size() const { return box_.size(); }

 private:
  Box box_;
  Eigen::MatrixXcd values_;
};

// Ascending eigenvalues of a Hermitian matrix; EigensolveFailure on error.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m);

// M[x, y] = K(x - y) for x, y in the box.
HermitianMatrix compress(const LatticeKernel& kernel, const Box& box);

// Compression onto the n consecutive sites 0, e_1, ..., (n-1) e_1. Used for
// site counts that are not cube volumes.
Eigen::MatrixXcd compress_segment(const LatticeKernel& kernel, int sites);

// log tr e^{-H} = sum_i log(1 + e^{-lambda_i(h)}).
double finite_pressure(const HermitianMatrix& h_box);
double finite_pressure(const Eigen::MatrixXcd& h);

// sum_i eta(mu_i(C)), eta the binary entropy. SpectrumOutOfRange when an
// eigenvalue lies within 1e-12 of 0 or 1.
double finite_entropy(const HermitianMatrix& c_box);
double finite_entropy(const Eigen::MatrixXcd& c);

// tr(C h_box) = sum_{x,y} C(y - x) h_box[x, y].
double finite_energy(const LatticeKernel& cov, const HermitianMatrix& h_box);

// (E + P - S) / |box|. NegativityViolation below -1e-10.
double relative_entropy_per_site(double entropy, double energy, double pressure,
                                 const Box& box);

struct SurfaceBond {
  Offset x;
  Offset y;
  Complex value;
};

// Entries of w = h - h^dec: the bonds with exactly one end inside the box,
// each listed with its mirror.
struct SurfaceCoupling {
  std::vector<SurfaceBond> bonds;
  double l1() const;
};

SurfaceCoupling surface_kernel(const LatticeKernel& h, const Box& box);

struct SurfaceL1 {
  double per_site = 0.0;
  // (2/|box|) (|L \ L-R'| |||h||| + |L-R'| sum_{|z| >= R'} |h(z)|), minimized over R'.
  double split_bound_per_site = 0.0;
  int best_split = 0;
};

SurfaceL1 surface_l1_per_site(const LatticeKernel& h, const Box& box);

// e^{2 |im_z| sup|h|} sum |w(x, y)|; divide by |box| for the per-site value.
double surface_analytic_bound(const LatticeKernel& h, const Box& box, double im_z,
                              const Symbol& h_symbol);

struct VolumeRow {
  int half_width = 0;
  std::size_t volume = 0;
  double entropy_per_site = 0.0;
  double pressure_per_site = 0.0;
  double energy_per_site = 0.0;
  double rel_entropy_per_site = 0.0;
  double surface_l1_per_site = 0.0;
  double analytic_bound_per_site = 0.0;
};

// All one-particle quantities for the box of half width L.
VolumeRow volume_row(const LatticeKernel& cov, const LatticeKernel& h, const Symbol& h_symbol,
                     int half_width, double im_z);

}  // namespace fermitherm
