#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlsh/etdrk4.hpp"
#include "nlsh/kernel.hpp"
#include "nlsh/spectral.hpp"

namespace nlsh {

/// Symbol of L v = -(1 + d_x^2)^2 v + eps^2 v.
inline double linear_symbol(double kappa, double eps) {
  const double a = 1.0 - kappa * kappa;
  return -a * a + eps * eps;
}

/// Evaluates N(u) = -u (Q * u) - u (K * u^2) with the kernel multipliers
/// tabulated once for a grid.
class SHNonlinearity {
 public:
  SHNonlinearity(const TorusGrid& grid, const KernelMeasure& Q, const KernelMeasure& K);

  Spectrum operator()(const Spectrum& u) const;

 private:
  TorusGrid grid_;
  std::vector<double> q_;
  std::vector<double> k_;
  bool has_q_;
  bool has_k_;
};

/// One-shot form; rejects NaN input.
Spectrum nonlinearity(const Spectrum& u, const KernelMeasure& Q, const KernelMeasure& K);
SpectralField nonlinearity(const SpectralField& u, const KernelMeasure& Q, const KernelMeasure& K);

struct SHProblem {
  TorusGrid grid;
  double eps;
  KernelMeasure Q;
  KernelMeasure K;
  SpectralField initial;
  double t_end;
  double dt;

  /// Throws std::invalid_argument when eps, times, or the initial field are unusable.
  void validate() const;
};

struct BlowUpReport {
  long step;
  double time;
  std::string message;
};

struct SHTrajectory {
  std::vector<double> times;
  std::vector<Spectrum> spectra;
  std::vector<double> sup_norms;
  std::vector<double> c4_norms;
  double dt = 0.0;  // step actually used, t_end / steps
  std::optional<BlowUpReport> blow_up;

  SpectralField field(std::size_t k) const { return from_fourier(spectra.at(k)); }
};

/// Number of steps so that steps * dt' = t_end with dt' <= dt.
long step_count(double t_end, double dt);

/// Integrates to t_end, recording a snapshot every `snapshot_stride` steps and
/// at t_end. Blow-up stops the run; the last finite state is the final snapshot.
SHTrajectory simulate_sh(const SHProblem& problem, int snapshot_stride);

}  // namespace nlsh
