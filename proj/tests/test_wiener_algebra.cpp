#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fermitherm/errors.hpp"
#include "fermitherm/scalar.hpp"
#include "fermitherm/wiener_algebra.hpp"
#include "oracles.hpp"

using namespace fermitherm;

namespace {

LatticeKernel random_kernel(std::mt19937_64& rng, int d, int radius, bool hermitian) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LatticeKernel::Entries e;
  Offset x(d, -radius);
  while (true) {
    e[x] = Complex(u(rng), u(rng));
    int axis = d - 1;
    while (axis >= 0 && ++x[axis] > radius) x[axis--] = -radius;
    if (axis < 0) break;
  }
  if (hermitian) {
    for (auto& [off, v] : e) {
      Offset minus(off);
      for (int& c : minus) c = -c;
      if (off < minus) e[minus] = std::conj(v);
      if (off == minus) v = v.real();
    }
  }
  return LatticeKernel(d, radius, e);
}

LatticeKernel fermi_dirac_cov(int grid_n, int radius) {
  const Symbol s = Symbol::from_function(1, grid_n, [](std::span<const double> k) {
    return 1.0 / (1.0 + std::exp(-2.0 * std::cos(k[0])));
  });
  return kernel_from_symbol(s, radius, 1e-10).kernel;
}

}  // namespace

TEST_CASE("symbol_from_kernel evaluates the Fourier sum on the grid") {
  SUBCASE("nearest-neighbour kernel, N=8") {
    const auto k = oracle::trig_kernel(1, 0.25);
    const Symbol s = symbol_from_kernel(k, 8);
    REQUIRE(s.size() == 8);
    CHECK(s.is_real());
    const auto v = s.real_samples();
    for (int m = 0; m < 8; ++m) {
      CHECK(v[m] == doctest::Approx(0.5 + 0.25 * std::cos(Symbol::grid_momentum(m, 8))).epsilon(1e-15));
    }
    // k = 0 sits at m = N/2
    CHECK(v[4] == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("delta kernel gives a constant symbol") {
    const Symbol s = symbol_from_kernel(LatticeKernel::constant(1, 0.3), 16);
    for (double v : s.real_samples()) CHECK(v == 0.3);
  }
  SUBCASE("two dimensions against direct summation") {
    const auto k = oracle::trig_kernel(2, 0.125);
    const Symbol s = symbol_from_kernel(k, 16);
    REQUIRE(s.size() == 256);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto mom = s.momentum(i);
      worst = std::max(worst, std::abs(s.samples()[i] - oracle::direct_symbol(k, mom)));
      const double closed = 0.5 + 0.125 * (std::cos(mom[0]) + std::cos(mom[1]));
      CHECK(s.samples()[i].real() == doctest::Approx(closed).epsilon(1e-14));
    }
    CHECK(worst < 1e-14);
  }
  SUBCASE("aliasing is rejected") {
    LatticeKernel::Entries e{{{0}, 1.0}, {{3}, 0.5}};
    const LatticeKernel k(1, 3, e);
    CHECK_THROWS_AS(symbol_from_kernel(k, 6), AliasingError);
    CHECK_NOTHROW(symbol_from_kernel(k, 8));
    CHECK_THROWS_AS(symbol_from_kernel(k, 9), AliasingError);
  }
}

TEST_CASE("kernel_from_symbol inverts the transform with a certified tail") {
  SUBCASE("constant symbol") {
    const Symbol s(1, 32, std::vector<Complex>(32, Complex(0.7, 0.0)));
    const auto t = kernel_from_symbol(s, 3, 1e-10);
    CHECK(t.tail_mass < 1e-15);
    CHECK(t.kernel.at({0}).real() == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(std::abs(t.kernel.at({1})) < 1e-15);
  }
  SUBCASE("cosine symbol, N=64, radius 2") {
    const Symbol s = Symbol::from_function(1, 64, [](std::span<const double> k) {
      return 0.5 + 0.25 * std::cos(k[0]);
    });
    const auto t = kernel_from_symbol(s, 2, 1e-12);
    CHECK(std::abs(t.kernel.at({0}) - 0.5) < 1e-14);
    CHECK(std::abs(t.kernel.at({1}) - 0.125) < 1e-14);
    CHECK(std::abs(t.kernel.at({-1}) - 0.125) < 1e-14);
    CHECK(std::abs(t.kernel.at({2})) < 1e-14);
    CHECK(t.tail_mass < 1e-13);
    for (int x = -2; x <= 2; ++x) {
      const Complex ref = oracle::inverse_dft_1d(
          [](double k) { return 0.5 + 0.25 * std::cos(k); }, 64, x);
      CHECK(std::abs(t.kernel.at({x}) - ref) < 1e-14);
    }
  }
  SUBCASE("Fermi-Dirac symbol, N=256, radius 20") {
    const Symbol s = Symbol::from_function(1, 256, [](std::span<const double> k) {
      return 1.0 / (1.0 + std::exp(-2.0 * std::cos(k[0])));
    });
    const auto t = kernel_from_symbol(s, 20, 1e-10);
    CHECK(t.tail_mass < 1e-10);
    // Regression constant: independent numpy evaluation of the same inverse DFT.
    CHECK(t.tail_mass == doctest::Approx(6.680120371225766e-12).epsilon(1e-2));
    CHECK(t.kernel.at({1}).real() == doctest::Approx(0.20291892).epsilon(1e-7));
    CHECK(t.kernel.is_hermitian());
  }
  SUBCASE("tail tolerance exceeded carries the measured mass") {
    const Symbol s = Symbol::from_function(1, 256, [](std::span<const double> k) {
      return 1.0 / (1.0 + std::exp(-2.0 * std::cos(k[0])));
    });
    try {
      kernel_from_symbol(s, 4, 1e-10);
      FAIL("expected TailToleranceExceeded");
    } catch (const TailToleranceExceeded& e) {
      CHECK(e.tail_mass() > 1e-10);
    }
  }
  SUBCASE("radius must stay below N/2") {
    const Symbol s(1, 8, std::vector<Complex>(8, Complex(1.0, 0.0)));
    CHECK_THROWS_AS(kernel_from_symbol(s, 4, 1.0), AliasingError);
  }
}

TEST_CASE("convolution, l1 norm and the Fourier homomorphism") {
  const auto a = oracle::trig_kernel(1, 0.25);
  SUBCASE("unit") {
    const auto c = convolve(LatticeKernel::constant(1, 1.0), a);
    for (const auto& [x, v] : a.entries()) CHECK(c.at(x) == v);
    CHECK(c.radius() == 1);
  }
  SUBCASE("self-convolution") {
    const auto c = convolve(a, a);
    CHECK(c.radius() == 2);
    CHECK(std::abs(c.at({0}) - 9.0 / 32) < 1e-15);
    CHECK(std::abs(c.at({1}) - 1.0 / 8) < 1e-15);
    CHECK(std::abs(c.at({-1}) - 1.0 / 8) < 1e-15);
    CHECK(std::abs(c.at({2}) - 1.0 / 64) < 1e-15);
    for (int x = -2; x <= 2; ++x) CHECK(std::abs(c.at({x}) - oracle::brute_convolution(a, a, {x})) < 1e-15);
    // Non-negative kernels saturate submultiplicativity: 9/32 + 2/8 + 2/64.
    CHECK(l1_norm(c) == doctest::Approx(0.5625).epsilon(1e-15));
    CHECK(l1_norm(c) <= l1_norm(a) * l1_norm(a));
  }
  SUBCASE("l1 norm") {
    CHECK(l1_norm(a) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(l1_norm(LatticeKernel(2, 0, {})) == 0.0);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(convolve(a, oracle::trig_kernel(2, 0.1)), DimensionMismatch);
  }
}

TEST_CASE("property: homomorphism, round trip, submultiplicativity") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 1 + trial % 2;
    const auto a = random_kernel(rng, d, trial % 3, trial % 4 == 0);
    const auto b = random_kernel(rng, d, (trial / 3) % 3, false);
    const auto ab = convolve(a, b);

    const int n = 2 * ab.radius() + 2 + 2 * (trial % 2);
    const Symbol sa = symbol_from_kernel(a, n);
    const Symbol sb = symbol_from_kernel(b, n);
    const Symbol sab = symbol_from_kernel(ab, n);
    double worst = 0.0;
    for (std::size_t i = 0; i < sab.size(); ++i) {
      worst = std::max(worst, std::abs(sab.samples()[i] - sa.samples()[i] * sb.samples()[i]));
    }
    CHECK(worst < 1e-12);

    CHECK(l1_norm(ab) <= l1_norm(a) * l1_norm(b) + 1e-12);

    const auto back = kernel_from_symbol(symbol_from_kernel(a, 2 * a.radius() + 2), a.radius(), 1e-12);
    double diff = 0.0;
    for (const auto& [x, v] : a.entries()) diff = std::max(diff, std::abs(back.kernel.at(x) - v));
    CHECK(diff <= 1e-13);
  }
}

TEST_CASE("check_regularity scans the symbol range") {
  SUBCASE("constant one half") {
    const auto r = check_regularity(LatticeKernel::constant(1, 0.5), 256);
    CHECK(r.min_value == 0.5);
    CHECK(r.max_value == 0.5);
    CHECK(r.margin == 0.5);
    CHECK(r.is_regular);
  }
  SUBCASE("symbol touching zero") {
    const auto r = check_regularity(oracle::trig_kernel(1, 0.5), 256);
    CHECK(r.min_value == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r.min_value <= 0.0);
    CHECK_FALSE(r.is_regular);
  }
  SUBCASE("quarter amplitude") {
    const auto r = check_regularity(oracle::trig_kernel(1, 0.25), 256);
    CHECK(r.min_value == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.max_value == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.l1_norm == doctest::Approx(0.75));
    CHECK(r.margin == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.is_regular);
  }
  SUBCASE("non-Hermitian kernels are rejected") {
    LatticeKernel::Entries e{{{0}, 0.5}, {{1}, 0.1}};
    CHECK_THROWS_AS(check_regularity(LatticeKernel(1, 1, e), 16), NonHermitianKernel);
  }
}

TEST_CASE("compose_wiener_levy builds h = log((1 - C)/C)") {
  SUBCASE("constant covariances") {
    const auto h_half = compose_wiener_levy(LatticeKernel::constant(1, 0.5), 64, 4, 1e-10);
    CHECK(l1_norm(h_half.kernel) == 0.0);
    const auto h_quarter = compose_wiener_levy(LatticeKernel::constant(1, 0.25), 64, 4, 1e-10);
    CHECK(h_quarter.kernel.at({0}).real() == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(l1_norm(h_quarter.kernel) == doctest::Approx(1.0986123).epsilon(1e-7));
  }
  SUBCASE("cosine covariance, N=256, radius 24") {
    const auto t = compose_wiener_levy(oracle::trig_kernel(1, 0.25), 256, 24, 1e-10);
    CHECK(t.tail_mass < 1e-10);
    CHECK(t.kernel.is_hermitian());
    const auto m = [](double k) {
      const double c = 0.5 + 0.25 * std::cos(k);
      return std::log((1 - c) / c);
    };
    for (int x = 0; x <= 6; ++x) {
      CHECK(std::abs(t.kernel.at({x}) - oracle::inverse_dft_1d(m, 256, x)) < 1e-13);
    }
    // numpy reference for the nearest-neighbour coefficient
    CHECK(t.kernel.at({1}).real() == doctest::Approx(-0.535898385).epsilon(1e-8));
    const auto h = symbol_from_kernel(t.kernel, 256).real_samples();
    CHECK(h[128] == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));  // k = 0
    CHECK(h[0] == doctest::Approx(std::log(3.0)).epsilon(1e-12));          // k = -pi
  }
  SUBCASE("non-regular covariances are rejected") {
    CHECK_THROWS_AS(compose_wiener_levy(oracle::trig_kernel(1, 0.5), 256, 24, 1e-10), NotRegular);
    CHECK_THROWS_AS(compose_wiener_levy(LatticeKernel::constant(1, 1.2), 16, 2, 1e-10), NotRegular);
  }
}

TEST_CASE("property: Wiener-Levy consistency and Hermiticity") {
  std::vector<std::pair<LatticeKernel, int>> cases;
  cases.emplace_back(oracle::trig_kernel(1, 0.25), 256);
  cases.emplace_back(oracle::trig_kernel(1, 0.45), 256);
  cases.emplace_back(oracle::trig_kernel(2, 0.125), 64);
  cases.emplace_back(fermi_dirac_cov(256, 20), 256);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.08, 0.08);
  for (int i = 0; i < 6; ++i) {
    LatticeKernel::Entries e{{{0}, 0.5}};
    for (int x = 1; x <= 2; ++x) {
      const Complex v(u(rng), u(rng));
      e[{x}] = v;
      e[{-x}] = std::conj(v);
    }
    cases.emplace_back(LatticeKernel(1, 2, e), 256);
  }
  for (const auto& [cov, n] : cases) {
    const int radius = n / 2 - 4;
    const auto h = compose_wiener_levy(cov, n, radius, 1e-10);
    CHECK(h.kernel.is_hermitian());
    const auto recovered = symbol_from_kernel(h.kernel, n).map_real(fermi).real_samples();
    const auto original = symbol_from_kernel(cov, n).real_samples();
    double worst = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
      worst = std::max(worst, std::abs(recovered[i] - original[i]));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("kernel JSON round trip") {
  std::mt19937_64 rng(3);
  const auto k = random_kernel(rng, 2, 2, true);
  nlohmann::json j = k;
  const auto back = kernel_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.dimension() == 2);
  CHECK(back.radius() == 2);
  CHECK(back.entries() == k.entries());
  CHECK(j.at("entries").at(0).contains("offset"));
  CHECK_THROWS_AS(kernel_from_json(nlohmann::json{{"dimension", 1}}), ConfigError);
  CHECK_THROWS_AS(kernel_from_json(nlohmann::json::parse(
                      R"({"dimension":1,"radius":0,"entries":[{"offset":[2],"re":1}]})")),
                  ConfigError);
}
