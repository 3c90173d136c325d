#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "fermitherm/defaults.hpp"
#include "fermitherm/finite_volume.hpp"

namespace fermitherm {

// Jordan-Wigner representation of the CAR over n sites on C^{2^n}. Basis
// state s is a bit mask, bit j set when site j is occupied; sites follow the
// box's lexicographic order. a_j |s> = (-1)^{#occupied sites below j} |s - j>.
class FockRep {
 public:
  explicit FockRep(int sites, int fock_cap = defaults::kFockCap);
  explicit FockRep(const Box& box, int fock_cap = defaults::kFockCap);

  int sites() const { return sites_; }
  Eigen::Index dim() const { return Eigen::Index{1} << sites_; }

  const Eigen::SparseMatrix<double>& annihilator(int site) const { return annihilators_.at(site); }
  Eigen::SparseMatrix<double> creator(int site) const;

 private:
  int sites_;
  std::vector<Eigen::SparseMatrix<double>> annihilators_;
};

// One factor a_site or a_site^dagger of a monomial.
struct Ladder {
  int site;
  bool dagger;
};

// Image of basis state `state` under the monomial (rightmost factor first).
// Returns sign 0 when the state is annihilated.
struct LadderImage {
  int sign;
  std::uint64_t state;
};
LadderImage apply_word(std::span<const Ladder> word, std::uint64_t state);

// Many-body density matrix: Hermitian within 1e-12 and trace one within 1e-12.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd rho);

  const Eigen::MatrixXcd& values() const { return rho_; }
  Eigen::Index dim() const { return rho_.rows(); }

 private:
  Eigen::MatrixXcd rho_;
};

// tr(rho * word).
Complex expectation(const DensityMatrix& rho, std::span<const Ladder> word);

// G[x, y] = tr(rho a_y^dagger a_x), the convention under which the Gaussian
// state of a covariance C reproduces C.
Eigen::MatrixXcd two_point_function(const FockRep& fock, const DensityMatrix& rho);

double von_neumann_entropy(const DensityMatrix& rho);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// H = sum_{x,y} h[x, y] a_x^dagger a_y as a dense 2^n matrix.
Eigen::MatrixXcd quadratic_hamiltonian(const FockRep& fock, const Eigen::MatrixXcd& h);

// Total number operator N = sum_x a_x^dagger a_x (diagonal).
Eigen::MatrixXcd number_operator(const FockRep& fock);

struct GibbsState {
  DensityMatrix rho;
  double log_normalizer;  // log tr e^{-H}
};

GibbsState gibbs_state(const Eigen::MatrixXcd& hamiltonian);

// Gibbs state of the quadratic Hamiltonian with one-particle matrix
// log((1 - C) / C). SpectrumOutOfRange unless spec(C) lies in ]0,1[.
DensityMatrix gaussian_state(const FockRep& fock, const Eigen::MatrixXcd& c);

// Largest deviation from the Wick determinant formula over all monomials
// a_{x1}^+ ... a_{xp}^+ a_{yq} ... a_{y1} with p, q <= max_order; mixed orders
// p != q must vanish.
double wick_expectation_check(const DensityMatrix& rho, const Eigen::MatrixXcd& c, int max_order);

// Smallest log c with c^{-1} nu <= omega <= c nu: the largest |log| of an
// eigenvalue of nu^{-1/2} omega nu^{-1/2}. SingularState when either state has
// an eigenvalue below 1e-13.
double weak_gibbs_log_constant(const DensityMatrix& omega, const DensityMatrix& nu);

// tr(omega (log omega - log nu)).
double relative_entropy_exact(const DensityMatrix& omega, const DensityMatrix& nu);

// Operator-norm distance between e^{itH} a(f) e^{-itH} and a(e^{ith} f),
// where a(f) = sum_x conj(f_x) a_x and H is the quadratic Hamiltonian of h.
double bogoliubov_deviation(const FockRep& fock, const Eigen::MatrixXcd& h, double t,
                            const Eigen::VectorXcd& f);

struct MaxEntResult {
  double optimal_entropy = 0.0;
  DensityMatrix optimizer;
  double constraint_residual = 0.0;  // max |tr(rho a_y^+ a_x) - C[x, y]|
  int iterations = 0;
  Eigen::MatrixXcd multipliers;      // M with rho proportional to e^{-H(M)}
};

// Maximizes -tr(rho log rho) subject to tr(rho a_y^+ a_x) = C[x, y] by
// descent on the convex dual g(M) = log tr e^{-H(M)} + tr(M C), using only
// many-body traces. NonConvergence when the residual stays above tol.
MaxEntResult max_entropy_solve(const FockRep& fock, const Eigen::MatrixXcd& c, double tol,
                               int max_iter);

// States rho + eps X, with X Hermitian and orthogonal to the identity and to
// every a_y^+ a_x, so they share trace and two-point function with rho. States
// whose constraint residual exceeds tol are redrawn; fewer than count come
// back only after 20 count attempts.
std::vector<DensityMatrix> perturbed_feasible_states(const FockRep& fock, const DensityMatrix& rho,
                                                     int count, std::uint64_t seed, double tol);

}  // namespace fermitherm
