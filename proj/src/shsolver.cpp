#include "nlsh/shsolver.hpp"

#include <cmath>
#include <stdexcept>

namespace nlsh {

namespace {

bool has_nan(const Spectrum& s) {
  for (const auto& c : s.coeffs)
    if (std::isnan(c.real()) || std::isnan(c.imag())) return true;
  return false;
}

}  // namespace

SHNonlinearity::SHNonlinearity(const TorusGrid& grid, const KernelMeasure& Q, const KernelMeasure& K)
    : grid_(grid), has_q_(!Q.is_zero()), has_k_(!K.is_zero()) {
  q_.resize(static_cast<std::size_t>(grid.N()));
  k_.resize(static_cast<std::size_t>(grid.N()));
  for (int j = 0; j < grid.N(); ++j) {
    q_[static_cast<std::size_t>(j)] = fourier_symbol(Q, grid.kappa(j));
    k_[static_cast<std::size_t>(j)] = fourier_symbol(K, grid.kappa(j));
  }
}

Spectrum SHNonlinearity::operator()(const Spectrum& u) const {
  if (!has_q_ && !has_k_) return Spectrum(grid_);
  const cvec uu = padded_samples(u);
  cvec acc(uu.size());

  if (has_q_) {
    Spectrum qu = u;
    for (std::size_t j = 0; j < qu.coeffs.size(); ++j) qu.coeffs[j] *= q_[j];
    const cvec qs = padded_samples(qu);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] -= uu[j] * qs[j];
  }
  if (has_k_) {
    cvec sq(uu.size());
    for (std::size_t j = 0; j < sq.size(); ++j) sq[j] = uu[j] * uu[j];
    Spectrum ku = from_padded_samples(grid_, sq);
    for (std::size_t j = 0; j < ku.coeffs.size(); ++j) ku.coeffs[j] *= k_[j];
    const cvec ks = padded_samples(ku);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] -= uu[j] * ks[j];
  }
  return from_padded_samples(grid_, acc);
}

Spectrum nonlinearity(const Spectrum& u, const KernelMeasure& Q, const KernelMeasure& K) {
  if (has_nan(u)) throw std::invalid_argument("nonlinearity: NaN in input");
  return SHNonlinearity(u.grid, Q, K)(u);
}

SpectralField nonlinearity(const SpectralField& u, const KernelMeasure& Q, const KernelMeasure& K) {
  return from_fourier(nonlinearity(to_fourier(u), Q, K));
}

void SHProblem::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("SH problem: eps must lie in (0, 1)");
  if (!(t_end >= 0.0)) throw std::invalid_argument("SH problem: t_end must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("SH problem: dt must be positive");
  if (!(initial.grid == grid)) throw GridError("SH problem: initial field lives on another grid");
  const double scale = std::max(1.0, sup_norm(initial));
  if (initial.max_imag() > 1e-10 * scale) throw std::invalid_argument("SH problem: initial field must be real");
}

long step_count(double t_end, double dt) {
  if (t_end <= 0.0) return 0;
  return static_cast<long>(std::ceil(t_end / dt - 1e-9));
}

SHTrajectory simulate_sh(const SHProblem& problem, int snapshot_stride) {
  problem.validate();
  if (snapshot_stride < 1) throw std::invalid_argument("simulate_sh: snapshot_stride must be >= 1");

  const long steps = step_count(problem.t_end, problem.dt);
  const double dt = steps > 0 ? problem.t_end / static_cast<double>(steps) : problem.dt;
  const double eps = problem.eps;

  SHTrajectory traj;
  traj.dt = dt;
  auto record = [&](double t, const Spectrum& u) {
    traj.times.push_back(t);
    traj.spectra.push_back(u);
    traj.sup_norms.push_back(sup_norm(from_fourier(u)));
    traj.c4_norms.push_back(c_norm(u, 4));
  };

  Spectrum u = to_fourier(problem.initial);
  // Drop the round-off imaginary part of the initial samples.
  u = 0.5 * (u + conjugate(u));
  record(0.0, u);
  if (steps == 0) return traj;

  const Etdrk4 stepper(problem.grid, [eps](double k) { return linear_symbol(k, eps); }, dt);
  const SHNonlinearity nl(problem.grid, problem.Q, problem.K);

  for (long n = 1; n <= steps; ++n) {
    Spectrum next = stepper.step(u, nl);
    const double t = static_cast<double>(n) * dt;
    try {
      check_finite(next, n, t);
    } catch (const BlowUpError& e) {
      traj.blow_up = BlowUpReport{e.step(), e.time(), e.what()};
      const double last_t = static_cast<double>(n - 1) * dt;
      if (traj.times.back() != last_t) record(last_t, u);
      return traj;
    }
    u = std::move(next);
    if (n % snapshot_stride == 0 || n == steps) record(t, u);
  }
  return traj;
}

}  // namespace nlsh
