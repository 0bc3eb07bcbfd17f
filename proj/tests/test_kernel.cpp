#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "nlsh/kernel.hpp"

using namespace nlsh;
using boost::math::quadrature::gauss_kronrod;

namespace {

// Independent oracle: integrate cos(kx) rho(x) over the half line, doubled.
double gaussian_density(double m, double s, double x) {
  return m * std::exp(-x * x / (2 * s * s)) / std::sqrt(2 * std::numbers::pi * s * s);
}

double quad_symbol_gaussian(double m, double s, double k) {
  auto f = [&](double x) { return std::cos(k * x) * gaussian_density(m, s, x); };
  return 2.0 * gauss_kronrod<double, 61>::integrate(f, 0.0, 40.0 * s, 25, 1e-14);
}

double quad_symbol_laplace(double m, double r, double k) {
  // Split into periods so the oscillatory tail is integrated piecewise.
  auto f = [&](double x) { return std::cos(k * x) * m * 0.5 * r * std::exp(-r * x); };
  double total = 0.0;
  const double upper = 60.0 / r;
  const int pieces = 200;
  for (int i = 0; i < pieces; ++i) {
    total += gauss_kronrod<double, 31>::integrate(f, upper * i / pieces, upper * (i + 1) / pieces, 10, 1e-15);
  }
  return 2.0 * total;
}

double quad_symbol_uniform(double m, double h, double k) {
  auto f = [&](double x) { return std::cos(k * x) * m / (2.0 * h); };
  return 2.0 * gauss_kronrod<double, 61>::integrate(f, 0.0, h, 15, 1e-15);
}

}  // namespace

TEST_CASE("dirac and atom symbols") {
  const auto d = KernelMeasure::dirac();
  for (double k : {-3.0, 0.0, 0.7, 5.0}) CHECK(fourier_symbol(d, k) == doctest::Approx(1.0));

  const auto pair = KernelMeasure::from_half_line({{1.0, 0.5}});
  CHECK(fourier_symbol(pair, 2.0) == doctest::Approx(std::cos(2.0)).epsilon(1e-15));
  CHECK(fourier_symbol(pair, 2.0) == doctest::Approx(-0.4161468).epsilon(1e-7));
  CHECK(total_variation(pair) == doctest::Approx(1.0));
  CHECK(first_moment(pair) == doctest::Approx(1.0));
}

TEST_CASE("gaussian symbol against quadrature") {
  const auto g = KernelMeasure::gaussian(1.0, 1.0);
  CHECK(std::abs(fourier_symbol(g, 1.0) - quad_symbol_gaussian(1.0, 1.0, 1.0)) < 1e-12);
  CHECK(fourier_symbol(g, 1.0) == doctest::Approx(0.6065307).epsilon(1e-7));
  CHECK(total_variation(KernelMeasure::gaussian(2.0, 1.0)) == doctest::Approx(2.0));
}

TEST_CASE("closed forms agree with adaptive quadrature on [-5, 5]") {
  const auto g = KernelMeasure::gaussian(0.8, 0.7);
  const auto l = KernelMeasure::laplace(1.3, 1.7);
  const auto u = KernelMeasure::uniform(-0.6, 1.2);
  for (int i = -50; i <= 50; ++i) {
    const double k = 0.1 * i + 0.0137;
    CHECK(std::abs(fourier_symbol(g, k) - quad_symbol_gaussian(0.8, 0.7, k)) < 1e-10);
    CHECK(std::abs(fourier_symbol(l, k) - quad_symbol_laplace(1.3, 1.7, k)) < 1e-10);
    CHECK(std::abs(fourier_symbol(u, k) - quad_symbol_uniform(-0.6, 1.2, k)) < 1e-10);
  }
  // The uniform family switches to a series near k = 0.
  CHECK(std::abs(fourier_symbol(u, 1e-6) - quad_symbol_uniform(-0.6, 1.2, 1e-6)) < 1e-12);
}

TEST_CASE("first moments against quadrature") {
  auto tail = [](auto&& f, double upper) {
    return 2.0 * gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 25, 1e-14);
  };
  const double lap = tail([](double x) { return x * 0.5 * std::exp(-x); }, 80.0);
  CHECK(first_moment(KernelMeasure::laplace(1.0, 1.0)) == doctest::Approx(lap).epsilon(1e-10));
  CHECK(first_moment(KernelMeasure::laplace(1.0, 1.0)) == doctest::Approx(1.0));

  const double gau = tail([](double x) { return x * gaussian_density(1.5, 0.4, x); }, 20.0);
  CHECK(first_moment(KernelMeasure::gaussian(1.5, 0.4)) == doctest::Approx(gau).epsilon(1e-10));

  const double uni = tail([](double x) { return x * 0.7 / (2 * 2.0); }, 2.0);
  CHECK(first_moment(KernelMeasure::uniform(0.7, 2.0)) == doctest::Approx(uni).epsilon(1e-10));
}

TEST_CASE("coefficient tables") {
  const auto t = coefficient_table(KernelMeasure::dirac(0.3), 2);
  for (int n = -2; n <= 2; ++n) CHECK(t.at(n) == doctest::Approx(0.3));

  const auto g = coefficient_table(KernelMeasure::gaussian(1.0, 1.0), 2);
  CHECK(g.at(0) == doctest::Approx(1.0));
  CHECK(g.at(1) == doctest::Approx(quad_symbol_gaussian(1, 1, 1)).epsilon(1e-12));
  CHECK(g.at(2) == doctest::Approx(quad_symbol_gaussian(1, 1, 2)).epsilon(1e-12));
  CHECK(g.at(2) == doctest::Approx(0.1353353).epsilon(1e-6));
  CHECK(g.at(-2) == g.at(2));

  const auto z = coefficient_table(KernelMeasure::zero(), 3);
  for (int n = -3; n <= 3; ++n) CHECK(z.at(n) == 0.0);

  CHECK_THROWS_AS(coefficient_table(KernelMeasure::zero(), -1), std::invalid_argument);
}

TEST_CASE("symmetry validation") {
  CHECK_THROWS_AS(KernelMeasure({{1.0, 0.5}}, std::nullopt), KernelError);
  CHECK_THROWS_AS(KernelMeasure({{1.0, 0.5}, {-1.0, 0.4}}, std::nullopt), KernelError);
  CHECK_NOTHROW(KernelMeasure({{1.0, 0.5}, {-1.0, 0.5}, {0.0, 2.0}}, std::nullopt));
  CHECK_NOTHROW(KernelMeasure({{1.0, 0.5}, {-1.0 - 1e-13, 0.5}}, std::nullopt));
  CHECK_THROWS_AS(KernelMeasure::gaussian(1.0, -1.0), KernelError);
}

TEST_CASE("evenness, total-variation bound, Lipschitz bound on random kernels") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Atom> half{{std::abs(3 * U(rng)), U(rng)}, {0.0, U(rng)}};
    std::optional<SmoothPart> smooth;
    switch (trial % 3) {
      case 0: smooth = Gaussian{U(rng), 0.2 + std::abs(U(rng))}; break;
      case 1: smooth = Laplace{U(rng), 0.2 + std::abs(U(rng))}; break;
      default: smooth = Uniform{U(rng), 0.2 + std::abs(U(rng))}; break;
    }
    const auto Q = KernelMeasure::from_half_line(half, smooth);
    const double tv = total_variation(Q), mom = first_moment(Q);
    for (int i = 0; i < 20; ++i) {
      const double k1 = 6 * U(rng), k2 = 6 * U(rng);
      const double a = fourier_symbol(Q, k1), b = fourier_symbol(Q, k2);
      CHECK(a == fourier_symbol(Q, -k1));
      CHECK(std::abs(a) <= tv * (1 + 1e-12));
      CHECK(std::abs(a - b) <= mom * std::abs(k1 - k2) * (1 + 1e-9) + 1e-14);
    }
  }
}

TEST_CASE("json round trip") {
  const auto j = nlohmann::json::parse(R"({"atoms": [[0, 0.5], [2, 0.25]],
                                           "smooth": {"family": "laplace", "mass": 1.5, "rate": 2}})");
  const auto Q = kernel_from_json(j);
  CHECK(Q.atoms().size() == 3);
  CHECK(total_variation(Q) == doctest::Approx(0.5 + 0.5 + 1.5));
  const auto back = kernel_from_json(kernel_to_json(Q));
  for (double k : {0.0, 0.5, 1.0, 2.5}) CHECK(fourier_symbol(back, k) == doctest::Approx(fourier_symbol(Q, k)));

  CHECK(kernel_from_json(nlohmann::json("dirac")).atoms().size() == 1);
  CHECK(kernel_from_json(nlohmann::json()).is_zero());
  CHECK_THROWS(kernel_from_json(nlohmann::json::parse(R"({"smooth": {"family": "cauchy"}})")));
}
