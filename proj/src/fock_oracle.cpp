#include "fermitherm/fock_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "fermitherm/errors.hpp"
#include "fermitherm/scalar.hpp"
#include "fermitherm/spectral.hpp"

namespace fermitherm {

namespace {

// (-1)^{number of occupied sites below `site`}
int jordan_wigner_sign(int site, std::uint64_t state) {
  const std::uint64_t below = state & ((std::uint64_t{1} << site) - 1);
  return (std::popcount(below) & 1) ? -1 : 1;
}

void require_square(const Eigen::MatrixXcd& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionMismatch(std::string(what) + " has size " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected " + std::to_string(n));
  }
}

void require_hermitian(const Eigen::MatrixXcd& m, const char* what) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw NonHermitianKernel(std::string(what) + " is not Hermitian");
  }
}

struct GibbsDetail {
  Eigen::MatrixXcd rho;
  double log_z;
  double entropy;
};

GibbsDetail gibbs_detail(const Eigen::MatrixXcd& hamiltonian) {
  const HermitianSpectrum spectrum(hamiltonian);
  const Eigen::VectorXd energies = spectrum.eigenvalues();
  const double shift = energies(0);
  double z = 0.0;
  for (double e : energies) z += std::exp(-(e - shift));
  double entropy = 0.0;
  for (double e : energies) {
    const double p = std::exp(-(e - shift)) / z;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  Eigen::MatrixXcd rho = spectrum.apply([shift, z](double e) { return std::exp(-(e - shift)) / z; });
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {std::move(rho), std::log(z) - shift, entropy};
}

Eigen::MatrixXcd dense(const Eigen::SparseMatrix<double>& m) {
  return Eigen::MatrixXd(m).cast<Complex>();
}

// a(f) = sum_x conj(f_x) a_x
Eigen::MatrixXcd annihilation_operator(const FockRep& fock, const Eigen::VectorXcd& f) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(fock.dim(), fock.dim());
  for (int x = 0; x < fock.sites(); ++x) out += std::conj(f(x)) * dense(fock.annihilator(x));
  return out;
}

void check_spectrum_inside_unit_interval(const Eigen::MatrixXcd& c) {
  const Eigen::VectorXd mu = hermitian_eigenvalues(c);
  if (mu(0) <= 1e-12 || mu(mu.size() - 1) >= 1.0 - 1e-12) {
    throw SpectrumOutOfRange("covariance spectrum [" + std::to_string(mu(0)) + ", " +
                             std::to_string(mu(mu.size() - 1)) + "] is not inside ]0,1[");
  }
}

}  // namespace

FockRep::FockRep(int sites, int fock_cap) : sites_(sites) {
  if (sites < 1) throw ConfigError("Fock space needs at least one site");
  if (sites > fock_cap) {
    throw BoxTooLarge(std::to_string(sites) + " sites exceed the Fock-space cap of " +
                      std::to_string(fock_cap));
  }
  const Eigen::Index d = dim();
  annihilators_.reserve(static_cast<std::size_t>(sites));
  for (int j = 0; j < sites; ++j) {
    const std::uint64_t bit = std::uint64_t{1} << j;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(d / 2));
    for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(d); ++s) {
      if (s & bit) {
        triplets.emplace_back(static_cast<Eigen::Index>(s ^ bit), static_cast<Eigen::Index>(s),
                              jordan_wigner_sign(j, s));
      }
    }
    Eigen::SparseMatrix<double> a(d, d);
    a.setFromTriplets(triplets.begin(), triplets.end());
    annihilators_.push_back(std::move(a));
  }
}

FockRep::FockRep(const Box& box, int fock_cap)
    : FockRep(static_cast<int>(std::min<std::size_t>(box.size(), 64)), fock_cap) {}

Eigen::SparseMatrix<double> FockRep::creator(int site) const {
  return Eigen::SparseMatrix<double>(annihilators_.at(site).transpose());
}

LadderImage apply_word(std::span<const Ladder> word, std::uint64_t state) {
  int sign = 1;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    const std::uint64_t bit = std::uint64_t{1} << it->site;
    const bool occupied = (state & bit) != 0;
    if (occupied == it->dagger) return {0, 0};
    sign *= jordan_wigner_sign(it->site, state);
    state ^= bit;
  }
  return {sign, state};
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols()) throw DimensionMismatch("density matrix is not square");
  require_hermitian(rho_, "density matrix");
  const double trace = rho_.trace().real();
  if (std::abs(trace - 1.0) > 1e-12) {
    throw RangeError("density matrix trace " + std::to_string(trace) + " differs from one");
  }
}

Complex expectation(const DensityMatrix& rho, std::span<const Ladder> word) {
  const auto& m = rho.values();
  Complex acc(0.0, 0.0);
  for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(rho.dim()); ++s) {
    const LadderImage img = apply_word(word, s);
    if (img.sign == 0) continue;
    // <s| rho A |s> = rho[s, t] * sign where A|s> = sign |t>
    acc += static_cast<double>(img.sign) *
           m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(img.state));
  }
  return acc;
}

Eigen::MatrixXcd two_point_function(const FockRep& fock, const DensityMatrix& rho) {
  require_square(rho.values(), fock.dim(), "density matrix");
  const int n = fock.sites();
  Eigen::MatrixXcd g(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      const Ladder word[] = {{y, true}, {x, false}};
      g(x, y) = expectation(rho, word);
    }
  }
  return g;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const Eigen::VectorXd p = HermitianSpectrum(rho.values()).eigenvalues();
  if (p(0) < -1e-12) throw RangeError("density matrix has a negative eigenvalue");
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s -= v * std::log(v);
  }
  return s;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("density matrices of different size");
  const Eigen::VectorXd d = HermitianSpectrum(a.values() - b.values()).eigenvalues();
  return 0.5 * d.cwiseAbs().sum();
}

Eigen::MatrixXcd quadratic_hamiltonian(const FockRep& fock, const Eigen::MatrixXcd& h) {
  const int n = fock.sites();
  require_square(h, n, "one-particle Hamiltonian");
  const Eigen::Index d = fock.dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(d); ++s) {
    for (int y = 0; y < n; ++y) {
      const std::uint64_t by = std::uint64_t{1} << y;
      if (!(s & by)) continue;
      const int sign_y = jordan_wigner_sign(y, s);
      const std::uint64_t removed = s ^ by;
      for (int x = 0; x < n; ++x) {
        const std::uint64_t bx = std::uint64_t{1} << x;
        if (removed & bx) continue;
        const int sign = sign_y * jordan_wigner_sign(x, removed);
        out(static_cast<Eigen::Index>(removed | bx), static_cast<Eigen::Index>(s)) +=
            static_cast<double>(sign) * h(x, y);
      }
    }
  }
  return out;
}

Eigen::MatrixXcd number_operator(const FockRep& fock) {
  Eigen::VectorXcd diag(fock.dim());
  for (Eigen::Index s = 0; s < fock.dim(); ++s) {
    diag(s) = static_cast<double>(std::popcount(static_cast<std::uint64_t>(s)));
  }
  return diag.asDiagonal();
}

GibbsState gibbs_state(const Eigen::MatrixXcd& hamiltonian) {
  if (hamiltonian.rows() != hamiltonian.cols()) throw DimensionMismatch("Hamiltonian not square");
  auto detail = gibbs_detail(hamiltonian);
  return {DensityMatrix(std::move(detail.rho)), detail.log_z};
}

DensityMatrix gaussian_state(const FockRep& fock, const Eigen::MatrixXcd& c) {
  require_square(c, fock.sites(), "covariance");
  require_hermitian(c, "covariance");
  check_spectrum_inside_unit_interval(c);
  const HermitianSpectrum spectrum(c, {all_indices(c.rows())});
  const Eigen::MatrixXcd k = spectrum.apply(logit_complement);
  return gibbs_state(quadratic_hamiltonian(fock, k)).rho;
}

double wick_expectation_check(const DensityMatrix& rho, const Eigen::MatrixXcd& c, int max_order) {
  const int n = static_cast<int>(c.rows());
  if (n < 1 || n > 62 || rho.dim() != (Eigen::Index{1} << n)) {
    throw DimensionMismatch("density matrix does not act on the Fock space of the covariance");
  }
  double worst = 0.0;
  std::vector<Ladder> word;
  std::vector<int> xs;
  std::vector<int> ys;
  for (int p = 0; p <= max_order; ++p) {
    for (int q = 0; q <= max_order; ++q) {
      if (p + q == 0) continue;
      long tuples = 1;
      for (int i = 0; i < p + q; ++i) tuples *= n;
      for (long code = 0; code < tuples; ++code) {
        long rest = code;
        xs.assign(p, 0);
        ys.assign(q, 0);
        for (int i = 0; i < p; ++i, rest /= n) xs[i] = static_cast<int>(rest % n);
        for (int i = 0; i < q; ++i, rest /= n) ys[i] = static_cast<int>(rest % n);
        // a_{x1}^+ ... a_{xp}^+ a_{yq} ... a_{y1}
        word.clear();
        for (int x : xs) word.push_back({x, true});
        for (int i = q - 1; i >= 0; --i) word.push_back({ys[i], false});
        Complex expected(0.0, 0.0);
        if (p == q) {
          Eigen::MatrixXcd minor(p, p);
          for (int i = 0; i < p; ++i) {
            for (int j = 0; j < p; ++j) minor(i, j) = c(ys[i], xs[j]);
          }
          expected = minor.determinant();
        }
        worst = std::max(worst, std::abs(expectation(rho, word) - expected));
      }
    }
  }
  return worst;
}

double weak_gibbs_log_constant(const DensityMatrix& omega, const DensityMatrix& nu) {
  if (omega.dim() != nu.dim()) throw DimensionMismatch("density matrices of different size");
  double log_c = 0.0;
  for (const auto& idx : common_partition(omega.values(), nu.values())) {
    const Eigen::MatrixXcd w = extract_block(omega.values(), idx);
    const Eigen::MatrixXcd v = extract_block(nu.values(), idx);
    const auto whole = std::vector<IndexSet>{all_indices(v.rows())};
    const HermitianSpectrum nu_spec(v, whole);
    if (nu_spec.min_eigenvalue() < 1e-13) throw SingularState("reference state is singular");
    if (HermitianSpectrum(w, whole).min_eigenvalue() < 1e-13) {
      throw SingularState("state is singular");
    }
    const Eigen::MatrixXcd inv_sqrt = nu_spec.apply([](double x) { return 1.0 / std::sqrt(x); });
    Eigen::MatrixXcd ratio = inv_sqrt * w * inv_sqrt;
    ratio = 0.5 * (ratio + ratio.adjoint()).eval();
    for (double mu : hermitian_eigenvalues(ratio)) log_c = std::max(log_c, std::abs(std::log(mu)));
  }
  return log_c;
}

double relative_entropy_exact(const DensityMatrix& omega, const DensityMatrix& nu) {
  if (omega.dim() != nu.dim()) throw DimensionMismatch("density matrices of different size");
  double total = 0.0;
  for (const auto& idx : common_partition(omega.values(), nu.values())) {
    const Eigen::MatrixXcd w = extract_block(omega.values(), idx);
    const Eigen::MatrixXcd v = extract_block(nu.values(), idx);
    const auto whole = std::vector<IndexSet>{all_indices(v.rows())};
    const HermitianSpectrum nu_spec(v, whole);
    if (nu_spec.min_eigenvalue() < 1e-13) throw SingularState("reference state is singular");
    const Eigen::MatrixXcd log_nu = nu_spec.apply([](double x) { return std::log(x); });
    double w_log_w = 0.0;
    for (double p : hermitian_eigenvalues(w)) {
      if (p < -1e-12) throw RangeError("density matrix has a negative eigenvalue");
      if (p > 0.0) w_log_w += p * std::log(p);
    }
    const double w_log_nu = w.cwiseProduct(log_nu.transpose()).sum().real();
    total += w_log_w - w_log_nu;
  }
  return total;
}

double bogoliubov_deviation(const FockRep& fock, const Eigen::MatrixXcd& h, double t,
                            const Eigen::VectorXcd& f) {
  const int n = fock.sites();
  require_square(h, n, "one-particle Hamiltonian");
  if (f.size() != n) throw DimensionMismatch("one-particle vector has the wrong length");
  const Complex i(0.0, 1.0);
  const auto phase = [t, i](double e) { return std::exp(i * t * e); };

  const Eigen::MatrixXcd evolve = HermitianSpectrum(quadratic_hamiltonian(fock, h)).apply_complex(phase);
  const Eigen::MatrixXcd lhs = evolve * annihilation_operator(fock, f) * evolve.adjoint();

  const Eigen::VectorXcd g = HermitianSpectrum(h, {all_indices(n)}).apply_complex(phase) * f;
  const Eigen::MatrixXcd diff = lhs - annihilation_operator(fock, g);
  const double top = HermitianSpectrum(diff.adjoint() * diff).max_eigenvalue();
  return std::sqrt(std::max(0.0, top));
}

MaxEntResult max_entropy_solve(const FockRep& fock, const Eigen::MatrixXcd& c, double tol,
                               int max_iter) {
  const int n = fock.sites();
  require_square(c, n, "covariance");
  require_hermitian(c, "covariance");
  check_spectrum_inside_unit_interval(c);

  struct Point {
    Eigen::MatrixXcd multipliers;
    GibbsDetail gibbs;
    Eigen::MatrixXcd gradient;  // C - G(M)
    double dual;
    double residual;
  };
  const auto evaluate = [&](Eigen::MatrixXcd m) {
    m = 0.5 * (m + m.adjoint()).eval();
    GibbsDetail g = gibbs_detail(quadratic_hamiltonian(fock, m));
    const DensityMatrix rho(g.rho);
    const Eigen::MatrixXcd grad = c - two_point_function(fock, rho);
    const double dual = g.log_z + (m * c).trace().real();
    const double residual = grad.cwiseAbs().maxCoeff();
    return Point{std::move(m), std::move(g), grad, dual, residual};
  };
  const auto inner = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a.adjoint() * b).trace().real();
  };

  Point current = evaluate(Eigen::MatrixXcd::Zero(n, n));
  Eigen::MatrixXcd prev_m;
  Eigen::MatrixXcd prev_grad;
  int it = 0;
  for (; it < max_iter && current.residual > tol; ++it) {
    double step = 1.0;
    if (it > 0) {
      // Barzilai-Borwein step from the last secant pair.
      const Eigen::MatrixXcd s = current.multipliers - prev_m;
      const Eigen::MatrixXcd y = current.gradient - prev_grad;
      const double sy = inner(s, y);
      if (sy > 0.0) step = std::clamp(inner(s, s) / sy, 1e-3, 1e3);
    }
    const double grad_sq = inner(current.gradient, current.gradient);
    const double slack = 1e-13 * (1.0 + std::abs(current.dual));
    std::optional<Point> trial;
    for (int backtrack = 0; backtrack < 50; ++backtrack) {
      trial = evaluate(current.multipliers - step * current.gradient);
      if (trial->dual <= current.dual - 1e-4 * step * grad_sq + slack) break;
      step *= 0.5;
    }
    prev_m = current.multipliers;
    prev_grad = current.gradient;
    current = std::move(*trial);
  }
  if (current.residual > tol) throw NonConvergence(current.residual, it);

  return MaxEntResult{current.gibbs.entropy, DensityMatrix(current.gibbs.rho), current.residual,
                      it, current.multipliers};
}

std::vector<DensityMatrix> perturbed_feasible_states(const FockRep& fock, const DensityMatrix& rho,
                                                     int count, std::uint64_t seed, double tol) {
  const Eigen::Index d = fock.dim();
  require_square(rho.values(), d, "density matrix");
  const int n = fock.sites();
  const auto inner = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a.conjugate().cwiseProduct(b)).sum().real();
  };

  // Orthonormal basis of span{1, a_y^+ a_x + h.c., i(a_y^+ a_x - h.c.)}.
  std::vector<Eigen::MatrixXcd> basis;
  const auto add = [&](Eigen::MatrixXcd m) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) m -= inner(q, m) * q;
    }
    const double norm = std::sqrt(inner(m, m));
    if (norm > 1e-10) basis.push_back(m / norm);
  };
  add(Eigen::MatrixXcd::Identity(d, d));
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      const Eigen::MatrixXcd a = dense(fock.creator(y)) * dense(fock.annihilator(x));
      add(a + a.adjoint());
      add(Complex(0.0, 1.0) * (a - a.adjoint()));
    }
  }

  const Eigen::MatrixXcd target = two_point_function(fock, rho);
  const double floor = HermitianSpectrum(rho.values()).min_eigenvalue();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 0.9);

  // Alternate number-conserving and sector-mixing draws until `count` states
  // survive. On one site the conserving directions are all constrained, so
  // only mixing draws contribute there.
  std::vector<DensityMatrix> out;
  const long max_attempts = 20L * count;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count; ++attempt) {
    const bool conserving = (attempt % 2 == 0);
    Eigen::MatrixXcd y(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) y(i, j) = Complex(normal(rng), normal(rng));
    }
    if (conserving) {
      for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
          if (std::popcount(static_cast<std::uint64_t>(i)) !=
              std::popcount(static_cast<std::uint64_t>(j))) {
            y(i, j) = 0.0;
          }
        }
      }
    }
    Eigen::MatrixXcd x = 0.5 * (y + y.adjoint());
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) x -= inner(q, x) * q;
    }
    x = 0.5 * (x + x.adjoint()).eval();
    const Eigen::VectorXd ev = HermitianSpectrum(x).eigenvalues();
    const double spread = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    if (spread < 1e-12) continue;
    const double eps = scale(rng) * floor / spread;
    Eigen::MatrixXcd sigma = rho.values() + eps * x;
    sigma = 0.5 * (sigma + sigma.adjoint()).eval();
    const double trace_err = std::abs(sigma.trace().real() - 1.0);
    if (trace_err > tol) continue;
    sigma /= sigma.trace().real();
    DensityMatrix candidate(std::move(sigma));
    const double residual = (two_point_function(fock, candidate) - target).cwiseAbs().maxCoeff();
    if (residual > tol) continue;
    out.push_back(std::move(candidate));
  }
  return out;
}

}  // namespace fermitherm
