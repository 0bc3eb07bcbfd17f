#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "nlsh/glsolver.hpp"
#include "test_support.hpp"

using namespace nlsh;
using nlsh::testing::max_abs_diff;

namespace {

const cplx I{0.0, 1.0};

Spectrum constant(const TorusGrid& g, cplx c) {
  Spectrum s(g);
  s.coeffs[0] = c;
  return s;
}

/// Random complex amplitude with modes |m| <= band on the slow grid.
Spectrum random_amplitude(const TorusGrid& g, std::mt19937_64& rng, int band, double scale) {
  std::normal_distribution<double> n;
  Spectrum s(g);
  for (int m = -band; m <= band; ++m)
    s.coeffs[static_cast<std::size_t>(g.slot(m))] = scale * cplx(n(rng), n(rng)) / (1.0 + m * m);
  return s;
}

}  // namespace

TEST_CASE("cubic coefficient") {
  CHECK(gl_cubic_coefficient(KernelMeasure::zero(), KernelMeasure::dirac()) == 3.0);
  CHECK(gl_cubic_coefficient(KernelMeasure::zero(), KernelMeasure::zero()) == 0.0);
  CHECK(gl_cubic_coefficient(KernelMeasure::dirac(), KernelMeasure::zero()) == doctest::Approx(-38.0 / 9.0));

  // Independent substitution with symbols evaluated by hand.
  const double q0 = 0.5, q1 = 0.5 * std::exp(-0.5), q2 = 0.5 * std::exp(-2.0);
  const double k0 = 1.0, k2 = std::exp(-2.0);
  const double expected = 2 * k0 + k2 - q1 * q2 / 9 - q1 * q1 / 9 - 2 * q0 * q1 - 2 * q1 * q1;
  CHECK(gl_cubic_coefficient(KernelMeasure::gaussian(0.5, 1.0), KernelMeasure::gaussian(1.0, 1.0)) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("rhs") {
  const TorusGrid g = TorusGrid::slow(10, 64);
  const double gamma = 3.0;
  const auto roll = constant(g, 1.0 / std::sqrt(gamma));
  CHECK(energy(gl_rhs(roll, gamma)) < 1e-30);
  CHECK(energy(gl_rhs(Spectrum(g), gamma)) == 0.0);

  const double L = g.M();
  const auto wave = to_fourier(SpectralField::from_function(g, [L](double X) { return 0.3 * std::exp(I * X / L); }));
  const auto lin = gl_rhs(wave, 0.0);
  CHECK(max_abs_diff(lin, (1.0 - 4.0 / (L * L)) * wave) < 1e-15);

  // The cubic term matches pointwise evaluation for band-limited data.
  std::mt19937_64 rng(37);
  const auto A = random_amplitude(g, rng, 4, 0.3);
  const auto f = from_fourier(A);
  const auto nl = from_fourier(gl_nonlinearity(A, 1.7));
  SpectralField direct(g);
  for (std::size_t j = 0; j < f.samples.size(); ++j) direct.samples[j] = -1.7 * std::norm(f.samples[j]) * f.samples[j];
  CHECK(max_abs_diff(nl, direct) < 1e-14);
}

TEST_CASE("fixed points") {
  const TorusGrid g = TorusGrid::slow(10, 32);
  const auto roll = constant(g, 1.0 / std::sqrt(3.0));
  const auto traj = simulate_gl({3.0, g, roll, 1.0, 0.01}, 10);
  REQUIRE(traj.complete(1.0));
  CHECK(traj.times.size() == 11);
  for (const auto& A : traj.A) CHECK(max_abs_diff(A, roll) < 1e-9);

  const auto zero = simulate_gl({3.0, g, Spectrum(g), 1.0, 0.01}, 10);
  for (const auto& A : zero.A) CHECK(energy(A) == 0.0);
}

TEST_CASE("gauge and conjugation symmetry") {
  const TorusGrid g = TorusGrid::slow(10, 64);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(0.0, 2 * std::numbers::pi);
  const auto A0 = random_amplitude(g, rng, 5, 0.4);
  const auto base = simulate_gl({3.0, g, A0, 1.0, 0.01}, 20);
  for (int trial = 0; trial < 3; ++trial) {
    const cplx phase = std::exp(I * U(rng));
    const auto rotated = simulate_gl({3.0, g, phase * A0, 1.0, 0.01}, 20);
    for (std::size_t k = 0; k < base.A.size(); ++k) CHECK(max_abs_diff(rotated.A[k], phase * base.A[k]) < 1e-9);
  }
  const auto conj = simulate_gl({3.0, g, conjugate(A0), 1.0, 0.01}, 20);
  for (std::size_t k = 0; k < base.A.size(); ++k) CHECK(max_abs_diff(conj.A[k], conjugate(base.A[k])) < 1e-9);
}

TEST_CASE("fourth-order time convergence") {
  const TorusGrid g = TorusGrid::slow(2, 32);
  std::mt19937_64 rng(43);
  const auto A0 = random_amplitude(g, rng, 1, 0.5);
  auto run = [&](double dT) { return simulate_gl({3.0, g, A0, 1.0, dT}, 1000000).A.back(); };
  const std::vector<double> dts{0.05, 0.025, 0.0125, 0.00625};
  const auto ref = run(dts.back() / 16);
  double mx = 0, my = 0, sxy = 0, sxx = 0;
  std::vector<double> lx, ly;
  for (double dT : dts) {
    lx.push_back(std::log(dT));
    ly.push_back(std::log(max_abs_diff(run(dT), ref)));
    mx += lx.back() / dts.size();
    my += ly.back() / dts.size();
  }
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  CHECK(sxy / sxx == doctest::Approx(4.0).epsilon(0.3 / 4.0));
}

TEST_CASE("focusing blow-up is reported") {
  const TorusGrid g = TorusGrid::slow(1, 16);
  const auto traj = simulate_gl({-5.0, g, constant(g, 2.0), 1.0, 0.001}, 10);
  REQUIRE(traj.blow_up.has_value());
  CHECK_FALSE(traj.complete(1.0));
  // |A|' = |A| + 5 |A|^3 from 2 blows up at log(1 + 1/20) / 2.
  CHECK(traj.blow_up->time == doctest::Approx(0.5 * std::log(1.0 + 1.0 / 20.0)).epsilon(0.01));
}

TEST_CASE("correctors and their time derivatives") {
  const TorusGrid g = TorusGrid::slow(10, 64);
  const auto c = correctors(constant(g, 1.0), 1.0);
  CHECK(std::abs(c.A0.coeffs[0] + 2.0) < 1e-15);
  CHECK(std::abs(c.A2.coeffs[0] + 1.0 / 9.0) < 1e-15);
  const auto z = correctors(Spectrum(g), 0.7);
  CHECK(energy(z.A0) + energy(z.A2) == 0.0);

  std::mt19937_64 rng(47);
  const auto A = random_amplitude(g, rng, 6, 0.5);
  const double q1 = 0.37;
  const auto cp = correctors(A, q1);
  CHECK(from_fourier(cp.A0).max_imag() < 1e-15);
  const auto f = from_fourier(A);
  const auto a2 = from_fourier(cp.A2);
  for (std::size_t j = 0; j < f.samples.size(); ++j) CHECK(std::abs(a2.samples[j] + q1 / 9 * f.samples[j] * f.samples[j]) < 1e-14);

  const auto roll = constant(g, 1.0 / std::sqrt(3.0));
  const auto still = corrector_time_derivatives(roll, gl_rhs(roll, 3.0), q1);
  CHECK(energy(still.A0) + energy(still.A2) < 1e-30);

  // Chain rule against a forward difference along the flow.
  const double h = 1e-3;
  const auto plus = simulate_gl({3.0, g, A, h, h / 4}, 1000).A.back();
  const auto dA = gl_rhs(A, 3.0);
  const auto dc = corrector_time_derivatives(A, dA, q1);
  const auto c1 = correctors(plus, q1);
  const auto fd0 = (1.0 / h) * (c1.A0 - cp.A0);
  const auto fd2 = (1.0 / h) * (c1.A2 - cp.A2);
  CHECK(max_abs_diff(fd0, dc.A0) < 5e-3 * std::max(1.0, c_norm(dc.A0, 0)));
  CHECK(max_abs_diff(fd2, dc.A2) < 5e-3 * std::max(1.0, c_norm(dc.A2, 0)));
}

TEST_CASE("time-derivative bound shape") {
  const TorusGrid g = TorusGrid::slow(10, 64);
  std::mt19937_64 rng(53);
  for (double q1 : {0.0, 0.3, -1.2}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto A = random_amplitude(g, rng, 8, 0.5);
      const auto d = corrector_time_derivatives(A, gl_rhs(A, 2.0), q1);
      const double lhs = c_norm(d.A0, 1) + c_norm(d.A2, 1);
      const double a1 = c_norm(A, 1);
      const double rhs = 10.0 * std::max(2 * std::abs(q1), 1.0) * (c_norm(A, 3) + a1 * a1 * a1) * a1;
      CHECK(lhs <= rhs);
    }
  }
}

TEST_CASE("amplitude presets") {
  const TorusGrid g = TorusGrid::slow(10, 128);
  AmplitudePreset roll;
  roll.name = "roll";
  const auto r = make_initial_amplitude(roll, g, 3.0);
  CHECK(std::abs(r.coeffs[0] - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK_THROWS(make_initial_amplitude(roll, g, -1.0));

  AmplitudePreset sech;
  sech.name = "sech";
  sech.band_limit = 0.5;
  const auto s = make_initial_amplitude(sech, g, 3.0);
  for (int j = 0; j < g.N(); ++j)
    if (std::abs(g.kappa(j)) > 0.5) CHECK(s.coeffs[static_cast<std::size_t>(j)] == cplx{});

  const auto m = make_initial_amplitude(AmplitudePreset{}, g, 3.0);
  CHECK(std::abs(m.coeffs[0] - 0.5) < 1e-15);
  CHECK(std::abs(m.coeffs[static_cast<std::size_t>(g.slot(6))] - 0.15) < 1e-15);

  AmplitudePreset bad;
  bad.name = "triangle";
  CHECK_THROWS(make_initial_amplitude(bad, g, 3.0));

  const auto round = amplitude_preset_from_json(to_json(sech));
  CHECK(round.name == "sech");
  CHECK(round.band_limit == 0.5);
}
