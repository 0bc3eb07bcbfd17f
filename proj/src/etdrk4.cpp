#include "nlsh/etdrk4.hpp"

#include <cmath>
#include <numbers>

namespace nlsh {

Etdrk4::Weights Etdrk4::weights(double z, double dt) {
  Weights w{};
  w.e = std::exp(z);
  w.e2 = std::exp(z / 2.0);
  if (std::abs(z) < kContourThreshold) {
    cplx q{}, f1{}, f2{}, f3{};
    for (int k = 1; k <= kContourPoints; ++k) {
      const double theta = std::numbers::pi * (k - 0.5) / (kContourPoints / 2.0);
      const cplx r = z + std::polar(1.0, theta);
      const cplx er = std::exp(r);
      const cplx r3 = r * r * r;
      q += (std::exp(r / 2.0) - 1.0) / r;
      f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
      f2 += (2.0 + r + er * (r - 2.0)) / r3;
      f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
    }
    const double scale = dt / kContourPoints;
    w.q = scale * q.real();
    w.f1 = scale * f1.real();
    w.f2 = scale * f2.real();
    w.f3 = scale * f3.real();
  } else {
    const double z3 = z * z * z;
    w.q = dt * (w.e2 - 1.0) / z;
    w.f1 = dt * (-4.0 - z + w.e * (4.0 - 3.0 * z + z * z)) / z3;
    w.f2 = dt * (2.0 + z + w.e * (z - 2.0)) / z3;
    w.f3 = dt * (-4.0 - 3.0 * z - z * z + w.e * (4.0 - z)) / z3;
  }
  return w;
}

Etdrk4::Etdrk4(const TorusGrid& grid, const std::function<double(double)>& symbol, double dt)
    : grid_(grid), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("etdrk4: dt must be positive");
  w_.reserve(static_cast<std::size_t>(grid.N()));
  for (int j = 0; j < grid.N(); ++j) w_.push_back(weights(symbol(grid.kappa(j)) * dt, dt));
}

Spectrum Etdrk4::step(const Spectrum& u, const Nonlinearity& nonlinearity) const {
  const std::size_t n = w_.size();
  const Spectrum nu = nonlinearity(u);

  Spectrum a(grid_);
  for (std::size_t j = 0; j < n; ++j) a.coeffs[j] = w_[j].e2 * u.coeffs[j] + w_[j].q * nu.coeffs[j];
  const Spectrum na = nonlinearity(a);

  Spectrum b(grid_);
  for (std::size_t j = 0; j < n; ++j) b.coeffs[j] = w_[j].e2 * u.coeffs[j] + w_[j].q * na.coeffs[j];
  const Spectrum nb = nonlinearity(b);

  Spectrum c(grid_);
  for (std::size_t j = 0; j < n; ++j)
    c.coeffs[j] = w_[j].e2 * a.coeffs[j] + w_[j].q * (2.0 * nb.coeffs[j] - nu.coeffs[j]);
  const Spectrum nc = nonlinearity(c);

  Spectrum next(grid_);
  for (std::size_t j = 0; j < n; ++j) {
    next.coeffs[j] = w_[j].e * u.coeffs[j] + w_[j].f1 * nu.coeffs[j] +
                     2.0 * w_[j].f2 * (na.coeffs[j] + nb.coeffs[j]) + w_[j].f3 * nc.coeffs[j];
  }
  return next;
}

Spectrum etdrk4_step(const Spectrum& u, double dt, const std::function<double(double)>& symbol,
                     const Etdrk4::Nonlinearity& nonlinearity) {
  return Etdrk4(u.grid, symbol, dt).step(u, nonlinearity);
}

void check_finite(const Spectrum& u, long step, double time, double threshold) {
  double bound = 0.0;
  for (const auto& c : u.coeffs) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw BlowUpError(step, time, "non-finite value at step " + std::to_string(step));
    bound += std::abs(c);
  }
  // sum |c_j| bounds the sup-norm; only transform when the bound is exceeded.
  if (bound > threshold && sup_norm(from_fourier(u)) > threshold)
    throw BlowUpError(step, time, "sup-norm above threshold at step " + std::to_string(step));
}

}  // namespace nlsh
