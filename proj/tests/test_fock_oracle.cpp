#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fermitherm/errors.hpp"
#include "fermitherm/fock_oracle.hpp"
#include "oracles.hpp"

using namespace fermitherm;

namespace {

Eigen::MatrixXcd dense(const Eigen::SparseMatrix<double>& m) {
  return Eigen::MatrixXd(m).cast<Complex>();
}

// f(C) through a plain eigendecomposition, independent of the sector solver.
template <class F>
Eigen::MatrixXcd matrix_function(const Eigen::MatrixXcd& c, F&& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
  Eigen::VectorXcd d(c.rows());
  for (Eigen::Index i = 0; i < c.rows(); ++i) d(i) = f(es.eigenvalues()(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& a, Complex factor) {
  return matrix_function(a, [&](double x) { return std::exp(factor * x); });
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd correlated_pair() {
  Eigen::MatrixXcd c(2, 2);
  c << 0.5, 0.125, 0.125, 0.5;
  return c;
}

}  // namespace

TEST_CASE("Jordan-Wigner representation satisfies the CAR") {
  SUBCASE("one site") {
    const FockRep f(1);
    Eigen::MatrixXcd a(2, 2);
    a << 0, 1, 0, 0;
    CHECK(max_abs(dense(f.annihilator(0)) - a) == 0.0);
  }
  SUBCASE("all anticommutators") {
    for (int n : {2, 3, 4}) {
      const FockRep f(n);
      const auto id = Eigen::MatrixXcd::Identity(f.dim(), f.dim());
      int identities = 0;
      double worst = 0.0;
      for (int i = 0; i < n; ++i) {
        const Eigen::MatrixXcd ai = dense(f.annihilator(i));
        const Eigen::MatrixXcd ci = dense(f.creator(i));
        CHECK(max_abs(ci - ai.adjoint()) == 0.0);
        for (int j = 0; j < n; ++j) {
          const Eigen::MatrixXcd aj = dense(f.annihilator(j));
          const Eigen::MatrixXcd cj = dense(f.creator(j));
          if (i <= j) {
            worst = std::max(worst, max_abs(ai * aj + aj * ai));
            worst = std::max(worst, max_abs(ci * cj + cj * ci));
            identities += 2;
          }
          const Eigen::MatrixXcd expect = (i == j ? 1.0 : 0.0) * id;
          worst = std::max(worst, max_abs(ai * cj + cj * ai - expect));
          ++identities;
        }
      }
      CHECK(worst <= 1e-14);
      CHECK(identities == n * (n + 1) + n * n);
      if (n == 3) CHECK(identities == 21);
    }
  }
  SUBCASE("cap") {
    CHECK_THROWS_AS(FockRep(13), BoxTooLarge);
    CHECK_THROWS_AS(FockRep(Box(1, 6)), BoxTooLarge);
    CHECK_THROWS_AS(FockRep(Box(2, 1), 8), BoxTooLarge);
    CHECK_NOTHROW(FockRep(Box(2, 1)));
  }
}

TEST_CASE("apply_word acts rightmost factor first") {
  const std::vector<Ladder> create01{{0, true}, {1, true}};
  const auto img = apply_word(create01, 0);
  CHECK(img.state == 3);
  // a_0^+ a_1^+ |0> = a_0^+ |1 at site 1>, no occupied site below 0
  CHECK(img.sign == 1);
  const std::vector<Ladder> create10{{1, true}, {0, true}};
  CHECK(apply_word(create10, 0).sign == -1);
  const std::vector<Ladder> kill{{0, false}};
  CHECK(apply_word(kill, 0).sign == 0);
}

TEST_CASE("quadratic Hamiltonians") {
  SUBCASE("zero and scalar one-particle operators") {
    const FockRep f(2);
    CHECK(max_abs(quadratic_hamiltonian(f, Eigen::MatrixXcd::Zero(2, 2))) == 0.0);
    const double lambda = 0.8;
    const Eigen::MatrixXcd H = quadratic_hamiltonian(f, lambda * Eigen::MatrixXcd::Identity(2, 2));
    CHECK(max_abs(H - lambda * number_operator(f)) == 0.0);
    const auto ev = hermitian_eigenvalues(H);
    CHECK(ev(0) == doctest::Approx(0.0));
    CHECK(ev(1) == doctest::Approx(lambda));
    CHECK(ev(2) == doctest::Approx(lambda));
    CHECK(ev(3) == doctest::Approx(2 * lambda));
  }
  SUBCASE("property: subset-sum spectrum and gauge invariance") {
    std::mt19937_64 rng(29);
    for (int n = 1; n <= 6; ++n) {
      const FockRep f(n);
      const Eigen::MatrixXcd h = oracle::random_hermitian(n, rng);
      const Eigen::MatrixXcd H = quadratic_hamiltonian(f, h);
      CHECK(max_abs(H - H.adjoint()) <= 1e-14);
      const Eigen::MatrixXcd N = number_operator(f);
      CHECK(max_abs(H * N - N * H) <= 1e-12);

      const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h).eigenvalues();
      std::vector<double> sums;
      for (unsigned s = 0; s < (1u << n); ++s) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          if (s >> i & 1u) acc += lam(i);
        }
        sums.push_back(acc);
      }
      std::sort(sums.begin(), sums.end());
      const Eigen::VectorXd spec = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H).eigenvalues();
      for (std::size_t i = 0; i < sums.size(); ++i) CHECK(std::abs(spec(i) - sums[i]) <= 1e-10);
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(quadratic_hamiltonian(FockRep(3), Eigen::MatrixXcd::Zero(2, 2)), DimensionMismatch);
  }
}

TEST_CASE("Gibbs and Gaussian states") {
  SUBCASE("zero Hamiltonian") {
    const auto g = gibbs_state(Eigen::MatrixXcd::Zero(8, 8));
    CHECK(max_abs(g.rho.values() - Eigen::MatrixXcd::Identity(8, 8) / 8.0) <= 1e-16);
    CHECK(g.log_normalizer == doctest::Approx(3 * std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("one mode") {
    const double lambda = 1.3;
    const FockRep f(1);
    const auto g = gibbs_state(lambda * number_operator(f));
    const double z = 1 + std::exp(-lambda);
    CHECK(g.rho.values()(0, 0).real() == doctest::Approx(1 / z).epsilon(1e-15));
    CHECK(g.rho.values()(1, 1).real() == doctest::Approx(std::exp(-lambda) / z).epsilon(1e-15));
    CHECK(g.log_normalizer == doctest::Approx(std::log(z)).epsilon(1e-15));
  }
  SUBCASE("maximally mixed Gaussian state") {
    const FockRep f(3);
    const auto rho = gaussian_state(f, 0.5 * Eigen::MatrixXcd::Identity(3, 3));
    CHECK(max_abs(rho.values() - Eigen::MatrixXcd::Identity(8, 8) / 8.0) <= 1e-15);
  }
  SUBCASE("property: two-point recovery, Gibbs consistency, entropy") {
    std::mt19937_64 rng(31);
    for (int n = 1; n <= 6; ++n) {
      const FockRep f(n);
      const Eigen::MatrixXcd c = oracle::random_covariance(n, rng);
      const auto rho = gaussian_state(f, c);
      CHECK(max_abs(two_point_function(f, rho) - c) <= 1e-10);

      const Eigen::MatrixXcd k =
          matrix_function(c, [](double x) { return Complex(std::log((1 - x) / x), 0.0); });
      const Eigen::MatrixXcd H = quadratic_hamiltonian(f, k);
      const Eigen::MatrixXcd expH = expm_hermitian(H, -1.0);
      CHECK(max_abs(rho.values() - expH / expH.trace()) <= 1e-10);

      CHECK(std::abs(von_neumann_entropy(rho) - finite_entropy(c)) <= 1e-9);
    }
  }
  SUBCASE("spectrum outside the unit interval") {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Identity(2, 2);
    c(0, 0) = 1.2;
    CHECK_THROWS_AS(gaussian_state(FockRep(2), c), SpectrumOutOfRange);
  }
  SUBCASE("density matrix validation") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix{m}, RangeError);
    m(0, 1) = 0.1;
    m /= 2.0;
    CHECK_THROWS_AS(DensityMatrix{m}, NonHermitianKernel);
  }
}

TEST_CASE("Wick determinants") {
  SUBCASE("correlated pair, four-point function") {
    const FockRep f(2);
    const auto rho = gaussian_state(f, correlated_pair());
    const std::vector<Ladder> word{{0, true}, {1, true}, {1, false}, {0, false}};
    const Complex v = expectation(rho, word);
    CHECK(v.real() == doctest::Approx(15.0 / 64).epsilon(1e-12));
    CHECK(std::abs(v.imag()) < 1e-14);
    CHECK(wick_expectation_check(rho, correlated_pair(), 1) <= 1e-14);
    CHECK(wick_expectation_check(rho, correlated_pair(), 2) <= 1e-12);
  }
  SUBCASE("four-site box, cosine covariance, order 3") {
    const Eigen::MatrixXcd c = compress_segment(oracle::trig_kernel(1, 0.25), 4);
    const auto rho = gaussian_state(FockRep(4), c);
    CHECK(wick_expectation_check(rho, c, 3) <= 1e-9);
  }
  SUBCASE("property: random covariances up to six sites") {
    std::mt19937_64 rng(37);
    for (int n = 2; n <= 6; ++n) {
      const Eigen::MatrixXcd c = oracle::random_covariance(n, rng);
      const auto rho = gaussian_state(FockRep(n), c);
      CHECK(wick_expectation_check(rho, c, 3) <= 1e-9);
    }
  }
  SUBCASE("a non-Gaussian state with the same two-point function is detected") {
    const FockRep f(3);
    std::mt19937_64 rng(41);
    const Eigen::MatrixXcd c = oracle::random_covariance(3, rng);
    const auto rho = gaussian_state(f, c);
    const auto others = perturbed_feasible_states(f, rho, 2, 5, 1e-10);
    REQUIRE(!others.empty());
    CHECK(wick_expectation_check(others.front(), c, 2) > 1e-6);
  }
}

TEST_CASE("weak-Gibbs constants and relative entropy") {
  SUBCASE("identical states") {
    std::mt19937_64 rng(43);
    const auto rho = gaussian_state(FockRep(3), oracle::random_covariance(3, rng));
    CHECK(weak_gibbs_log_constant(rho, rho) <= 1e-12);
    CHECK(std::abs(relative_entropy_exact(rho, rho)) <= 1e-12);
  }
  SUBCASE("scalar relative entropy") {
    const DensityMatrix omega(Eigen::MatrixXcd::Identity(2, 2) / 2.0);
    Eigen::MatrixXcd nu = Eigen::MatrixXcd::Zero(2, 2);
    nu(0, 0) = 0.75;
    nu(1, 1) = 0.25;
    CHECK(relative_entropy_exact(omega, DensityMatrix(nu)) ==
          doctest::Approx(0.5 * std::log(4.0 / 3)).epsilon(1e-13));
    CHECK(weak_gibbs_log_constant(omega, DensityMatrix(nu)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("singular states") {
    Eigen::MatrixXcd pure = Eigen::MatrixXcd::Zero(2, 2);
    pure(0, 0) = 1.0;
    const DensityMatrix mixed(Eigen::MatrixXcd::Identity(2, 2) / 2.0);
    CHECK_THROWS_AS(weak_gibbs_log_constant(mixed, DensityMatrix(pure)), SingularState);
    CHECK_THROWS_AS(weak_gibbs_log_constant(DensityMatrix(pure), mixed), SingularState);
    CHECK_THROWS_AS(relative_entropy_exact(mixed, DensityMatrix(pure)), SingularState);
  }
  SUBCASE("constant symbol: restriction equals local Gibbs state") {
    const auto cov = LatticeKernel::constant(1, 0.3);
    const auto h = compose_wiener_levy(cov, 64, 4, 1e-10).kernel;
    for (int L = 1; L <= 3; ++L) {
      const Box box(1, L);
      const FockRep f(box);
      const auto omega = gaussian_state(f, compress(cov, box).values());
      const auto nu = gibbs_state(quadratic_hamiltonian(f, compress(h, box).values())).rho;
      CHECK(weak_gibbs_log_constant(omega, nu) <= 1e-10);
    }
  }
  SUBCASE("cosine covariance: per-site constant does not grow, link to relative entropy") {
    const auto cov = oracle::trig_kernel(1, 0.25);
    const auto h = compose_wiener_levy(cov, 256, 24, 1e-10).kernel;
    double previous = std::numeric_limits<double>::infinity();
    for (int L = 1; L <= 5; ++L) {
      const Box box(1, L);
      const FockRep f(box);
      const auto omega = gaussian_state(f, compress(cov, box).values());
      const auto nu = gibbs_state(quadratic_hamiltonian(f, compress(h, box).values())).rho;
      const double logc = weak_gibbs_log_constant(omega, nu);
      const double rel = relative_entropy_exact(omega, nu);
      CHECK(logc > 0.0);
      CHECK(rel <= 2 * logc + 1e-9);
      const double per_site = logc / box.size();
      CHECK(per_site <= previous);
      previous = per_site;
    }
  }
}

TEST_CASE("Bogoliubov dynamics") {
  SUBCASE("t = 0") {
    std::mt19937_64 rng(47);
    const Eigen::VectorXcd f = Eigen::VectorXcd::Random(3);
    CHECK(bogoliubov_deviation(FockRep(3), oracle::random_hermitian(3, rng), 0.0, f) <= 1e-14);
  }
  SUBCASE("scalar one-particle Hamiltonian gives a phase") {
    const double lambda = 0.9, t = 1.1;
    const FockRep fock(3);
    Eigen::VectorXcd delta = Eigen::VectorXcd::Zero(3);
    delta(1) = 1.0;
    CHECK(bogoliubov_deviation(fock, lambda * Eigen::MatrixXcd::Identity(3, 3), t, delta) <= 1e-12);

    // e^{itH} a_1 e^{-itH} = e^{-i lambda t} a_1, checked with dense exponentials.
    const Eigen::MatrixXcd H = lambda * number_operator(fock);
    const Eigen::MatrixXcd U = expm_hermitian(H, Complex(0.0, t));
    const Eigen::MatrixXcd a1 = dense(fock.annihilator(1));
    CHECK(max_abs(U * a1 * U.adjoint() - std::exp(Complex(0.0, -lambda * t)) * a1) <= 1e-14);
  }
  SUBCASE("random Hamiltonian, four sites, t = 0.7") {
    std::mt19937_64 rng(53);
    const Eigen::MatrixXcd h = oracle::random_hermitian(4, rng);
    Eigen::VectorXcd f(4);
    for (int i = 0; i < 4; ++i) f(i) = Complex(std::cos(i + 1.0), std::sin(2.0 * i));
    CHECK(bogoliubov_deviation(FockRep(4), h, 0.7, f) <= 1e-9);
  }
  SUBCASE("property: n <= 6, |t| <= 2") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> ut(-2.0, 2.0);
    for (int n = 1; n <= 6; ++n) {
      const Eigen::MatrixXcd h = oracle::random_hermitian(n, rng);
      Eigen::VectorXcd f(n);
      std::normal_distribution<double> g;
      for (int i = 0; i < n; ++i) f(i) = Complex(g(rng), g(rng));
      CHECK(bogoliubov_deviation(FockRep(n), h, ut(rng), f) <= 1e-9);
    }
  }
}

TEST_CASE("maximum-entropy dual solver") {
  SUBCASE("maximally mixed optimum") {
    const FockRep f(2);
    const auto r = max_entropy_solve(f, 0.5 * Eigen::MatrixXcd::Identity(2, 2), 1e-8, 5000);
    CHECK(r.optimal_entropy == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
    CHECK(max_abs(r.optimizer.values() - Eigen::MatrixXcd::Identity(4, 4) / 4.0) <= 1e-12);
  }
  SUBCASE("single site") {
    Eigen::MatrixXcd c(1, 1);
    c << 0.3;
    const auto r = max_entropy_solve(FockRep(1), c, 1e-10, 5000);
    CHECK(std::abs(r.optimal_entropy - 0.61086430205489349) <= 1e-8);
  }
  SUBCASE("correlated pair") {
    const FockRep f(2);
    const auto r = max_entropy_solve(f, correlated_pair(), 1e-8, 5000);
    CHECK(r.constraint_residual <= 1e-8);
    CHECK(std::abs(r.optimal_entropy - 1.3231264763) <= 1e-6);
    CHECK(std::abs(r.optimal_entropy - (oracle::binary_entropy(0.625) + oracle::binary_entropy(0.375))) <= 1e-6);
    CHECK(trace_distance(r.optimizer, gaussian_state(f, correlated_pair())) <= 1e-4);
  }
  SUBCASE("random three-site covariances") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 3; ++trial) {
      const Eigen::MatrixXcd c = oracle::random_covariance(3, rng);
      const FockRep f(3);
      const auto r = max_entropy_solve(f, c, 1e-8, 5000);
      CHECK(r.constraint_residual <= 1e-8);
      CHECK(r.optimal_entropy <= 3 * std::log(2.0));
      CHECK(std::abs(r.optimal_entropy - finite_entropy(c)) <= 1e-6);
      CHECK(trace_distance(r.optimizer, gaussian_state(f, c)) <= 1e-4);
    }
  }
  SUBCASE("non-convergence and infeasible input") {
    std::mt19937_64 rng(67);
    const Eigen::MatrixXcd c = oracle::random_covariance(3, rng);
    try {
      max_entropy_solve(FockRep(3), c, 1e-12, 1);
      FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
      CHECK(std::string(e.what()).find("residual") != std::string::npos);
    }
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
    bad(1, 1) = 1.2;
    CHECK_THROWS_AS(max_entropy_solve(FockRep(2), bad, 1e-8, 100), SpectrumOutOfRange);
  }
}

TEST_CASE("perturbed feasible states never beat the Gaussian entropy") {
  std::mt19937_64 rng(71);
  const FockRep f(3);
  const Eigen::MatrixXcd c = oracle::random_covariance(3, rng);
  const auto rho = gaussian_state(f, c);
  const auto states = perturbed_feasible_states(f, rho, 100, 20240601ULL, 1e-10);
  CHECK(states.size() == 100);
  const double ceiling = finite_entropy(c);
  int sector_mixing = 0;
  for (const auto& s : states) {
    CHECK(std::abs(s.values().trace().real() - 1.0) <= 1e-12);
    CHECK(max_abs(two_point_function(f, s) - c) <= 1e-10);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(s.values()).eigenvalues()(0) >= 0.0);
    CHECK(von_neumann_entropy(s) <= ceiling + 1e-9);
    CHECK(trace_distance(s, rho) > 1e-6);
    if (std::abs(s.values()(0, 1)) > 1e-12) ++sector_mixing;
  }
  CHECK(sector_mixing > 0);
}

TEST_CASE("perturbed states on a single site mix sectors only") {
  Eigen::MatrixXcd c(1, 1);
  c(0, 0) = 0.3;
  const FockRep f(1);
  const auto rho = gaussian_state(f, c);
  const auto states = perturbed_feasible_states(f, rho, 40, 9, 1e-10);
  CHECK(states.size() == 40);
  for (const auto& s : states) {
    CHECK(std::abs(s.values()(1, 1).real() - 0.3) <= 1e-12);
    CHECK(std::abs(s.values()(0, 1)) > 1e-6);
    CHECK(von_neumann_entropy(s) < finite_entropy(c));
  }
}
