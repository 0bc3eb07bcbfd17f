#include "doctest.h"

#include <cmath>
#include <random>

#include "nlsh/shsolver.hpp"
#include "test_support.hpp"

using namespace nlsh;
using nlsh::testing::max_abs_diff;
using nlsh::testing::random_real_spectrum;

namespace {

const cplx I{0.0, 1.0};

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= x.size(), my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

SHProblem problem_on(const TorusGrid& g, double eps, KernelMeasure Q, KernelMeasure K,
                     std::function<cplx(double)> u0, double t_end, double dt) {
  return SHProblem{g, eps, std::move(Q), std::move(K), SpectralField::from_function(g, u0), t_end, dt};
}

}  // namespace

TEST_CASE("linear symbol") {
  CHECK(linear_symbol(1.0, 0.1) == doctest::Approx(0.01));
  CHECK(linear_symbol(-1.0, 0.1) == doctest::Approx(0.01));
  CHECK(linear_symbol(0.0, 0.0) == -1.0);
  const double k = 2.0, eps = 0.05;
  CHECK(linear_symbol(k, eps) == doctest::Approx(-(k * k * k * k - 2 * k * k + 1) + eps * eps));
  CHECK(linear_symbol(2.0, 0.05) == doctest::Approx(-8.9975));
  CHECK(linear_symbol(0.37, 0.2) == linear_symbol(-0.37, 0.2));
}

TEST_CASE("nonlinearity evaluations") {
  const TorusGrid g(1, 32);
  const auto zero = SpectralField(g);
  CHECK(sup_norm(nonlinearity(zero, KernelMeasure::dirac(), KernelMeasure::dirac())) == 0.0);

  const auto c = SpectralField::from_function(g, [](double) { return cplx(0.7); });
  const auto nq = nonlinearity(c, KernelMeasure::dirac(), KernelMeasure::zero());
  for (const auto& v : nq.samples) CHECK(std::abs(v + 0.49) < 1e-14);

  const auto cosx = SpectralField::from_function(g, [](double x) { return cplx(std::cos(x)); });
  const auto nk = nonlinearity(cosx, KernelMeasure::zero(), KernelMeasure::dirac());
  const auto expected = SpectralField::from_function(g, [](double x) { return cplx(-std::pow(std::cos(x), 3)); });
  CHECK(max_abs_diff(nk, expected) <= 1e-10);
  CHECK(nk.max_imag() <= 1e-10);

  SpectralField bad(g);
  bad.samples[3] = std::nan("");
  CHECK_THROWS(nonlinearity(bad, KernelMeasure::dirac(), KernelMeasure::zero()));
}

TEST_CASE("local kernels agree with pointwise evaluation") {
  const TorusGrid g(2, 64);
  std::mt19937_64 rng(29);
  const double q = 0.8, k = -1.3;
  const auto u = random_real_spectrum(g, rng, [](double kap) { return std::abs(kap) <= 2.0; });
  const auto f = from_fourier(u);
  const auto n = from_fourier(SHNonlinearity(g, KernelMeasure::dirac(q), KernelMeasure::dirac(k))(u));
  SpectralField direct(g);
  for (std::size_t j = 0; j < f.samples.size(); ++j) {
    const cplx v = f.samples[j];
    direct.samples[j] = -q * v * v - k * v * v * v;
  }
  // Cubic of band 2 has band 6 < ceiling 16, so no truncation is involved.
  CHECK(max_abs_diff(n, direct) <= 1e-12 * std::max(1.0, sup_norm(direct)));
}

TEST_CASE("exact linear propagation with zero kernels") {
  const TorusGrid g(4, 64);
  const double eps = 0.1;
  auto p = problem_on(g, eps, KernelMeasure::zero(), KernelMeasure::zero(),
                      [](double x) { return cplx(std::cos(x)); }, 0.5, 0.5);
  const auto one = simulate_sh(p, 1);
  const auto expected = std::exp(0.5 * eps * eps);
  CHECK(std::abs(one.spectra.back().coeffs[static_cast<std::size_t>(g.slot(4))] - 0.5 * expected) < 1e-15);

  std::mt19937_64 rng(31);
  const auto r = random_real_spectrum(g, rng, [](double k) { return std::abs(k) < 3; });
  p.initial = from_fourier(r);
  p.t_end = 10.0;
  p.dt = 0.1;
  const auto traj = simulate_sh(p, 10);
  const auto closed = apply_multiplier(r, [&](double k) { return cplx(std::exp(linear_symbol(k, eps) * 10.0)); });
  CHECK(max_abs_diff(traj.spectra.back(), closed) <= 1e-11);
}

TEST_CASE("zero is a fixed point; trajectories stay real") {
  const TorusGrid g(4, 64);
  auto p = problem_on(g, 0.2, KernelMeasure::gaussian(1, 1), KernelMeasure::dirac(), [](double) { return cplx(); },
                      3.0, 0.1);
  const auto t0 = simulate_sh(p, 5);
  for (double s : t0.sup_norms) CHECK(s == 0.0);

  p.initial = SpectralField::from_function(g, [](double x) { return cplx(0.3 * std::cos(x) + 0.1 * std::sin(x / 4)); });
  const auto t1 = simulate_sh(p, 5);
  CHECK(t1.times.size() == 7);
  for (std::size_t i = 1; i < t1.times.size(); ++i) CHECK(t1.times[i] > t1.times[i - 1]);
  for (const auto& s : t1.spectra) CHECK(conjugate_asymmetry(s) <= 1e-10);

  SpectralField complex_init(g);
  complex_init.samples[0] = {0.0, 1.0};
  p.initial = complex_init;
  CHECK_THROWS(simulate_sh(p, 1));
}

TEST_CASE("blow-up is reported with the last finite state") {
  const TorusGrid g(1, 16);
  // u' = -u + eps^2 u + u^2 on the mean mode with Q = -delta blows up from u = 3.
  auto p = problem_on(g, 0.5, KernelMeasure::dirac(-1.0), KernelMeasure::zero(), [](double) { return cplx(3.0); },
                      10.0, 0.01);
  const auto traj = simulate_sh(p, 100);
  REQUIRE(traj.blow_up.has_value());
  CHECK(traj.blow_up->time < 1.0);
  CHECK(std::isfinite(traj.sup_norms.back()));
}

TEST_CASE("stationary roll keeps its amplitude") {
  const TorusGrid g(1, 16);
  const double eps = 0.1;
  const double a = 1.0 / std::sqrt(3.0);
  auto p = problem_on(g, eps, KernelMeasure::zero(), KernelMeasure::dirac(),
                      [&](double x) { return cplx(2 * eps * a * std::cos(x)); }, 1.0 / (eps * eps), 0.1);
  const auto traj = simulate_sh(p, 100);
  REQUIRE_FALSE(traj.blow_up.has_value());
  for (const auto& s : traj.spectra) {
    const double amp = 2.0 * std::abs(s.coeffs[1]);
    CHECK(std::abs(amp - 2 * eps * a) <= 0.5 * eps * eps * eps);
  }
}

TEST_CASE("fourth-order time convergence and spatial resolution plateau") {
  const TorusGrid g(1, 32);
  auto u0 = [](double x) { return cplx(0.4 * std::cos(x) + 0.2 * std::sin(2 * x) + 0.1); };
  auto run = [&](double dt) {
    auto p = problem_on(g, 0.3, KernelMeasure::gaussian(0.5, 0.7), KernelMeasure::dirac(), u0, 2.0, dt);
    return simulate_sh(p, 1000000).spectra.back();
  };
  const std::vector<double> dts{0.2, 0.1, 0.05, 0.025};
  const auto ref = run(dts.back() / 16);
  std::vector<double> errs;
  for (double dt : dts) errs.push_back(max_abs_diff(run(dt), ref));
  CHECK(slope(dts, errs) == doctest::Approx(4.0).epsilon(0.3 / 4.0));

  // Doubling N leaves the final state unchanged on the shared modes.
  const TorusGrid g2(1, 64);
  auto p1 = problem_on(g, 0.3, KernelMeasure::zero(), KernelMeasure::dirac(), u0, 2.0, 0.05);
  auto p2 = problem_on(g2, 0.3, KernelMeasure::zero(), KernelMeasure::dirac(), u0, 2.0, 0.05);
  const auto a = simulate_sh(p1, 1000).spectra.back(), b = simulate_sh(p2, 1000).spectra.back();
  double diff = 0.0;
  for (int j = 0; j < g2.N(); ++j) {
    const int m = g2.mode(j);
    const int s = g.slot(m);
    const cplx ca = (s >= 0 && std::abs(m) < g.N() / 2) ? a.coeffs[static_cast<std::size_t>(s)] : cplx{};
    diff = std::max(diff, std::abs(ca - b.coeffs[static_cast<std::size_t>(j)]));
  }
  CHECK(diff <= 1e-9);
}

TEST_CASE("problem validation") {
  const TorusGrid g(1, 16);
  auto p = problem_on(g, 0.1, KernelMeasure::zero(), KernelMeasure::zero(), [](double) { return cplx(); }, 1, 0.1);
  p.eps = 1.2;
  CHECK_THROWS(simulate_sh(p, 1));
  p.eps = 0.1;
  p.dt = 0.0;
  CHECK_THROWS(simulate_sh(p, 1));
  p.dt = 0.1;
  CHECK_THROWS(simulate_sh(p, 0));
  CHECK(step_count(1.0, 0.3) == 4);
  CHECK(step_count(1.0, 0.1) == 10);
}
