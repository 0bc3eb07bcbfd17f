#include "nlsh/glsolver.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nlsh {

double gl_cubic_coefficient(const KernelMeasure& Q, const KernelMeasure& K) {
  const auto q = coefficient_table(Q, 2);
  const auto k = coefficient_table(K, 2);
  const double q0 = q.at(0), q1 = q.at(1), q2 = q.at(2);
  return 2.0 * k.at(0) + k.at(2) - q1 * q2 / 9.0 - q1 * q1 / 9.0 - 2.0 * q0 * q1 - 2.0 * q1 * q1;
}

Spectrum gl_nonlinearity(const Spectrum& A, double gamma) {
  if (gamma == 0.0) return Spectrum(A.grid);
  const Spectrum mod2 = dealiased_product(A, conjugate(A));
  return -gamma * dealiased_product(mod2, A);
}

Spectrum gl_rhs(const Spectrum& A, double gamma) {
  Spectrum out = apply_multiplier(A, [](double k) { return cplx(gl_linear_symbol(k)); });
  out += gl_nonlinearity(A, gamma);
  return out;
}

GLTrajectory simulate_gl(const GLSystem& system, int snapshot_stride) {
  if (snapshot_stride < 1) throw std::invalid_argument("simulate_gl: snapshot_stride must be >= 1");
  if (!(system.dT > 0.0)) throw std::invalid_argument("simulate_gl: dT must be positive");
  if (!(system.T_end >= 0.0)) throw std::invalid_argument("simulate_gl: T_end must be >= 0");
  if (!(system.initial.grid == system.grid_X)) throw GridError("simulate_gl: initial amplitude on another grid");

  const long steps = step_count(system.T_end, system.dT);
  const double dT = steps > 0 ? system.T_end / static_cast<double>(steps) : system.dT;

  GLTrajectory traj;
  traj.dT = dT;
  Spectrum A = system.initial;
  traj.times.push_back(0.0);
  traj.A.push_back(A);
  if (steps == 0) return traj;

  const double gamma = system.gamma;
  const Etdrk4 stepper(system.grid_X, gl_linear_symbol, dT);
  const Etdrk4::Nonlinearity nl = [gamma](const Spectrum& a) { return gl_nonlinearity(a, gamma); };

  for (long n = 1; n <= steps; ++n) {
    Spectrum next = stepper.step(A, nl);
    const double T = static_cast<double>(n) * dT;
    try {
      check_finite(next, n, T);
    } catch (const BlowUpError& e) {
      traj.blow_up = BlowUpReport{e.step(), e.time(), e.what()};
      const double last = static_cast<double>(n - 1) * dT;
      if (traj.times.back() != last) {
        traj.times.push_back(last);
        traj.A.push_back(A);
      }
      return traj;
    }
    A = std::move(next);
    if (n % snapshot_stride == 0 || n == steps) {
      traj.times.push_back(T);
      traj.A.push_back(A);
    }
  }
  return traj;
}

CorrectorPair correctors(const Spectrum& A, double q1) {
  const Spectrum Abar = conjugate(A);
  Spectrum A0 = (-2.0 * q1) * dealiased_product(A, Abar);
  // |A|^2 is real; remove round-off in the imaginary part.
  A0 = 0.5 * (A0 + conjugate(A0));
  return {std::move(A0), (-q1 / 9.0) * dealiased_product(A, A)};
}

CorrectorPair corrector_time_derivatives(const Spectrum& A, const Spectrum& dA, double q1) {
  const Spectrum cross = dealiased_product(dA, conjugate(A));
  Spectrum dA0 = (-2.0 * q1) * (cross + conjugate(cross));
  return {std::move(dA0), (-2.0 * q1 / 9.0) * dealiased_product(A, dA)};
}

// ---------------------------------------------------------------------------

AmplitudePreset amplitude_preset_from_json(const nlohmann::json& j) {
  AmplitudePreset p;
  if (j.is_string()) {
    p.name = j.get<std::string>();
    return p;
  }
  p.name = j.value("preset", p.name);
  p.amplitude = j.value("amplitude", p.amplitude);
  p.width = j.value("width", p.width);
  p.modulation = j.value("modulation", p.modulation);
  p.wave = j.value("wave", p.wave);
  p.twist = j.value("twist", p.twist);
  p.twist_wave = j.value("twist_wave", p.twist_wave);
  p.band_limit = j.value("band_limit", p.band_limit);
  return p;
}

nlohmann::json to_json(const AmplitudePreset& p) {
  return {{"preset", p.name},           {"amplitude", p.amplitude}, {"width", p.width},
          {"modulation", p.modulation}, {"wave", p.wave},           {"twist", p.twist},
          {"twist_wave", p.twist_wave}, {"band_limit", p.band_limit}};
}

Spectrum make_initial_amplitude(const AmplitudePreset& preset, const TorusGrid& grid_X, double gamma) {
  const double P = grid_X.M();
  std::function<cplx(double)> f;
  if (preset.name == "zero") {
    f = [](double) { return cplx{}; };
  } else if (preset.name == "roll") {
    if (!(gamma > 0.0)) throw std::invalid_argument("roll preset needs gamma > 0");
    const double a = 1.0 / std::sqrt(gamma);
    f = [a](double) { return cplx(a); };
  } else if (preset.name == "sech") {
    const double centre = std::numbers::pi * P;
    f = [&preset, centre](double X) { return cplx(preset.amplitude / std::cosh((X - centre) / preset.width)); };
  } else if (preset.name == "modulated") {
    f = [&preset, P](double X) {
      return cplx(preset.amplitude + preset.modulation * std::cos(preset.wave * X / P),
                  preset.twist * std::sin(preset.twist_wave * X / P));
    };
  } else {
    throw std::invalid_argument("unknown amplitude preset '" + preset.name + "'");
  }
  Spectrum A = to_fourier(SpectralField::from_function(grid_X, f));
  for (int j = 0; j < grid_X.N(); ++j) {
    if (std::abs(grid_X.kappa(j)) > preset.band_limit + 1e-12) A.coeffs[static_cast<std::size_t>(j)] = 0.0;
  }
  return A;
}

}  // namespace nlsh
