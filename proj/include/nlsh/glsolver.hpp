#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nlsh/etdrk4.hpp"
#include "nlsh/kernel.hpp"
#include "nlsh/shsolver.hpp"
#include "nlsh/spectral.hpp"

namespace nlsh {

/// gamma = 2 k0 + k2 - q1 q2 / 9 - q1^2 / 9 - 2 q0 q1 - 2 q1^2, so that the
/// amplitude equation reads  A_T = (1 + 4 A_XX) - gamma |A|^2 A.
double gl_cubic_coefficient(const KernelMeasure& Q, const KernelMeasure& K);

/// Symbol of (1 + 4 d_X^2) in the slow wavenumber.
inline double gl_linear_symbol(double kappa_x) { return 1.0 - 4.0 * kappa_x * kappa_x; }

/// -gamma |A|^2 A, products dealiased.
Spectrum gl_nonlinearity(const Spectrum& A, double gamma);

/// (1 + 4 d_X^2) A - gamma |A|^2 A.
Spectrum gl_rhs(const Spectrum& A, double gamma);

struct GLSystem {
  double gamma;
  TorusGrid grid_X;  // slow grid, length 2 pi P
  Spectrum initial;
  double T_end;
  double dT;
};

struct GLTrajectory {
  std::vector<double> times;
  std::vector<Spectrum> A;
  double dT = 0.0;
  std::optional<BlowUpReport> blow_up;

  bool complete(double T_end) const { return !blow_up && !times.empty() && times.back() >= T_end - 1e-12; }
};

GLTrajectory simulate_gl(const GLSystem& system, int snapshot_stride);

/// A0 = -2 q1 |A|^2 (real) and A2 = -(q1 / 9) A^2.
struct CorrectorPair {
  Spectrum A0;
  Spectrum A2;
};

CorrectorPair correctors(const Spectrum& A, double q1);

/// Chain rule images: dA0 = -2 q1 (dA conj(A) + A conj(dA)), dA2 = -(2/9) q1 A dA.
CorrectorPair corrector_time_derivatives(const Spectrum& A, const Spectrum& dA, double q1);

// ---------------------------------------------------------------------------
// Initial amplitude presets

/// {"preset": "roll" | "sech" | "modulated" | "zero", ...}. Every preset is
/// band-limited to |kappa_X| <= band_limit by spectral truncation.
struct AmplitudePreset {
  std::string name = "modulated";
  double amplitude = 0.5;    // sech height, modulated mean
  double width = 4.0;        // sech width
  double modulation = 0.3;   // modulated: cosine amplitude
  int wave = 6;              // modulated: cosine mode m, kappa_X = m / P
  double twist = 0.1;        // modulated: imaginary sine amplitude
  int twist_wave = 1;
  double band_limit = 1.0;
};

AmplitudePreset amplitude_preset_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AmplitudePreset& preset);

/// Samples the preset on the slow grid. The roll uses gamma and requires gamma > 0.
Spectrum make_initial_amplitude(const AmplitudePreset& preset, const TorusGrid& grid_X, double gamma);

}  // namespace nlsh
