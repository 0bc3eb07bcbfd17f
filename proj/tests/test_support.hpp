#pragma once

#include <cmath>
#include <random>

#include "nlsh/spectral.hpp"

namespace nlsh::testing {

/// Random real field whose coefficients live where `keep(kappa)` holds.
template <class Keep>
Spectrum random_real_spectrum(const TorusGrid& grid, std::mt19937_64& rng, Keep keep) {
  std::normal_distribution<double> g;
  Spectrum s(grid);
  for (int j = 0; j < grid.N(); ++j) {
    if (keep(grid.kappa(j))) s.coeffs[static_cast<std::size_t>(j)] = {g(rng), g(rng)};
  }
  return 0.5 * (s + conjugate(s));
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.samples.size(); ++j) m = std::max(m, std::abs(a.samples[j] - b.samples[j]));
  return m;
}

inline double max_abs_diff(const Spectrum& a, const Spectrum& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.coeffs.size(); ++j) m = std::max(m, std::abs(a.coeffs[j] - b.coeffs[j]));
  return m;
}

/// Energy of the coefficients outside |kappa| <= radius, relative to `reference`.
inline double energy_outside(const Spectrum& s, double radius) {
  double e = 0.0;
  for (int j = 0; j < s.grid.N(); ++j)
    if (std::abs(s.grid.kappa(j)) > radius + 1e-12) e += std::norm(s.coeffs[static_cast<std::size_t>(j)]);
  return e;
}

}  // namespace nlsh::testing
