#include "fermitherm/finite_volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fermitherm/errors.hpp"
#include "fermitherm/scalar.hpp"

namespace fermitherm {

namespace {

std::size_t cube_volume(int half_width, int d) {
  if (half_width < 0) return 0;
  std::size_t v = 1;
  for (int i = 0; i < d; ++i) v *= static_cast<std::size_t>(2 * half_width + 1);
  return v;
}

// Dense lookup of K on [-R, R]^d.
class KernelWindow {
 public:
  explicit KernelWindow(const LatticeKernel& k)
      : radius_(k.radius()), side_(2 * k.radius() + 1), values_(k.dense_window()) {}

  Complex at(const Offset& x, const Offset& y) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      const int diff = x[a] - y[a];
      if (diff > radius_ || diff < -radius_) return Complex(0.0, 0.0);
      flat = flat * side_ + static_cast<std::size_t>(diff + radius_);
    }
    return values_[flat];
  }

 private:
  int radius_;
  std::size_t side_;
  std::vector<Complex> values_;
};

}  // namespace

Box::Box(int dimension, int half_width) : dimension_(dimension), half_width_(half_width) {
  if (dimension <= 0) throw ConfigError("box dimension must be positive");
  if (half_width < 0) throw ConfigError("box half width must be non-negative");
  const std::size_t n = cube_volume(half_width, dimension);
  sites_.reserve(n);
  Offset x(dimension, -half_width);
  for (std::size_t i = 0; i < n; ++i) {
    sites_.push_back(x);
    for (int a = dimension - 1; a >= 0; --a) {
      if (++x[a] <= half_width) break;
      x[a] = -half_width;
    }
  }
}

bool Box::contains(const Offset& x) const { return max_norm(x) <= half_width_; }

std::optional<std::size_t> Box::index_of(const Offset& x) const {
  if (static_cast<int>(x.size()) != dimension_ || !contains(x)) return std::nullopt;
  std::size_t flat = 0;
  for (int c : x) flat = flat * (2 * half_width_ + 1) + static_cast<std::size_t>(c + half_width_);
  return flat;
}

HermitianMatrix::HermitianMatrix(Box box, Eigen::MatrixXcd values)
    : box_(std::move(box)), values_(std::move(values)) {
  const auto n = static_cast<Eigen::Index>(box_.size());
  if (values_.rows() != n || values_.cols() != n) {
    throw DimensionMismatch("matrix size does not match box volume");
  }
  if ((values_ - values_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw NonHermitianKernel("one-particle matrix is not Hermitian");
  }
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EigensolveFailure("Hermitian eigensolve failed");
  return solver.eigenvalues();
}

HermitianMatrix compress(const LatticeKernel& kernel, const Box& box) {
  if (kernel.dimension() != box.dimension()) {
    throw DimensionMismatch("kernel dimension " + std::to_string(kernel.dimension()) +
                            " does not match box dimension " + std::to_string(box.dimension()));
  }
  if (!kernel.is_hermitian()) throw NonHermitianKernel("cannot compress a non-Hermitian kernel");
  const KernelWindow window(kernel);
  const auto& sites = box.sites();
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = window.at(sites[i], sites[j]);
  }
  return HermitianMatrix(box, std::move(m));
}

Eigen::MatrixXcd compress_segment(const LatticeKernel& kernel, int sites) {
  if (sites <= 0) throw ConfigError("segment needs at least one site");
  if (!kernel.is_hermitian()) throw NonHermitianKernel("cannot compress a non-Hermitian kernel");
  const KernelWindow window(kernel);
  Eigen::MatrixXcd m(sites, sites);
  Offset x(kernel.dimension(), 0);
  Offset y(kernel.dimension(), 0);
  for (int i = 0; i < sites; ++i) {
    for (int j = 0; j < sites; ++j) {
      x[0] = i;
      y[0] = j;
      m(i, j) = window.at(x, y);
    }
  }
  return m;
}

double finite_pressure(const Eigen::MatrixXcd& h) {
  const Eigen::VectorXd lambda = hermitian_eigenvalues(h);
  double sum = 0.0;
  for (double l : lambda) sum += log1p_exp_neg(l);
  return sum;
}

double finite_pressure(const HermitianMatrix& h_box) { return finite_pressure(h_box.values()); }

double finite_entropy(const Eigen::MatrixXcd& c) {
  const Eigen::VectorXd mu = hermitian_eigenvalues(c);
  double sum = 0.0;
  for (double m : mu) {
    if (m <= 1e-12 || m >= 1.0 - 1e-12) {
      throw SpectrumOutOfRange("covariance eigenvalue " + std::to_string(m) +
                               " is not inside ]0,1[");
    }
    sum += binary_entropy(m);
  }
  return sum;
}

double finite_entropy(const HermitianMatrix& c_box) { return finite_entropy(c_box.values()); }

double finite_energy(const LatticeKernel& cov, const HermitianMatrix& h_box) {
  if (cov.dimension() != h_box.box().dimension()) {
    throw DimensionMismatch("covariance and box dimensions differ");
  }
  const KernelWindow window(cov);
  const auto& sites = h_box.box().sites();
  const auto& h = h_box.values();
  Complex sum(0.0, 0.0);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = 0; j < sites.size(); ++j) {
      sum += window.at(sites[j], sites[i]) *
             h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return sum.real();
}

double relative_entropy_per_site(double entropy, double energy, double pressure,
                                 const Box& box) {
  const double value = (energy + pressure - entropy) / static_cast<double>(box.size());
  if (value < -1e-10) {
    throw NegativityViolation("relative entropy per site " + std::to_string(value) +
                              " is negative");
  }
  return value;
}

double SurfaceCoupling::l1() const {
  double sum = 0.0;
  for (const auto& b : bonds) sum += std::abs(b.value);
  return sum;
}

SurfaceCoupling surface_kernel(const LatticeKernel& h, const Box& box) {
  if (h.dimension() != box.dimension()) throw DimensionMismatch("kernel and box dimensions differ");
  if (!h.is_hermitian()) throw NonHermitianKernel("surface kernel needs a Hermitian h");
  SurfaceCoupling out;
  Offset y(box.dimension());
  for (const auto& x : box.sites()) {
    for (const auto& [z, v] : h.entries()) {
      for (std::size_t a = 0; a < y.size(); ++a) y[a] = x[a] - z[a];
      if (box.contains(y)) continue;
      // w(x, y) = h(x - y) and its mirror w(y, x) = h(y - x) = conj(h(x - y)).
      out.bonds.push_back({x, y, v});
      out.bonds.push_back({y, x, std::conj(v)});
    }
  }
  return out;
}

SurfaceL1 surface_l1_per_site(const LatticeKernel& h, const Box& box) {
  const double volume = static_cast<double>(box.size());
  const double total = surface_kernel(h, box).l1();
  const double norm = l1_norm(h);
  const int d = box.dimension();
  const int L = box.half_width();

  SurfaceL1 out;
  out.per_site = total / volume;
  out.split_bound_per_site = std::numeric_limits<double>::infinity();
  for (int split = 0; split <= std::min(h.radius(), L); ++split) {
    double tail = 0.0;
    for (const auto& [z, v] : h.entries()) {
      if (max_norm(z) >= split) tail += std::abs(v);
    }
    const double inner = static_cast<double>(cube_volume(L - split, d));
    const double shell = volume - inner;
    const double bound = 2.0 * (shell * norm + inner * tail) / volume;
    if (bound < out.split_bound_per_site) {
      out.split_bound_per_site = bound;
      out.best_split = split;
    }
  }
  if (out.per_site > out.split_bound_per_site * (1.0 + 1e-12) + 1e-15) {
    throw Error("surface l1 mass " + std::to_string(out.per_site) +
                " exceeds its split bound " + std::to_string(out.split_bound_per_site));
  }
  return out;
}

double surface_analytic_bound(const LatticeKernel& h, const Box& box, double im_z,
                              const Symbol& h_symbol) {
  return std::exp(2.0 * std::abs(im_z) * operator_norm(h_symbol)) * surface_kernel(h, box).l1();
}

VolumeRow volume_row(const LatticeKernel& cov, const LatticeKernel& h, const Symbol& h_symbol,
                     int half_width, double im_z) {
  const Box box(cov.dimension(), half_width);
  const HermitianMatrix h_box = compress(h, box);
  const HermitianMatrix c_box = compress(cov, box);
  const double volume = static_cast<double>(box.size());

  const double entropy = finite_entropy(c_box);
  const double pressure = finite_pressure(h_box);
  const double energy = finite_energy(cov, h_box);

  VolumeRow row;
  row.half_width = half_width;
  row.volume = box.size();
  row.entropy_per_site = entropy / volume;
  row.pressure_per_site = pressure / volume;
  row.energy_per_site = energy / volume;
  row.rel_entropy_per_site = relative_entropy_per_site(entropy, energy, pressure, box);
  row.surface_l1_per_site = surface_l1_per_site(h, box).per_site;
  row.analytic_bound_per_site = surface_analytic_bound(h, box, im_z, h_symbol) / volume;
  return row;
}

}  // namespace fermitherm
