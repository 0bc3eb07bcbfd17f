#include "nlsh/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "nlsh/shsolver.hpp"

namespace nlsh {

// ---------------------------------------------------------------------------
// Grid

TorusGrid::TorusGrid(int M, int N, double min_ceiling) : M_(M), N_(N) {
  if (M <= 0) throw GridError("grid: M must be positive");
  if (N < 2 || !std::has_single_bit(static_cast<unsigned>(N)))
    throw GridError("grid: N must be a power of two, got " + std::to_string(N));
  if (ceiling() < min_ceiling)
    throw GridError("grid: N/(2M) = " + std::to_string(ceiling()) + " below required " +
                    std::to_string(min_ceiling));
}

double TorusGrid::length() const { return 2.0 * std::numbers::pi * M_; }

double TorusGrid::x(int j) const { return length() * j / N_; }

int TorusGrid::slot(int m) const {
  if (m >= N_ / 2 || m < -N_ / 2) return -1;
  return m >= 0 ? m : m + N_;
}

Spectrum::Spectrum(const TorusGrid& g, cvec c) : grid(g), coeffs(std::move(c)) {
  if (coeffs.size() != static_cast<std::size_t>(g.N())) throw GridError("spectrum: length mismatch");
}

namespace {
void require_same(const TorusGrid& a, const TorusGrid& b, const char* what) {
  if (!(a == b)) throw GridError(std::string(what) + ": grid mismatch");
}
}  // namespace

Spectrum& Spectrum::operator+=(const Spectrum& o) {
  require_same(grid, o.grid, "spectrum +=");
  for (std::size_t j = 0; j < coeffs.size(); ++j) coeffs[j] += o.coeffs[j];
  return *this;
}

Spectrum& Spectrum::operator-=(const Spectrum& o) {
  require_same(grid, o.grid, "spectrum -=");
  for (std::size_t j = 0; j < coeffs.size(); ++j) coeffs[j] -= o.coeffs[j];
  return *this;
}

Spectrum& Spectrum::operator*=(cplx s) {
  for (auto& c : coeffs) c *= s;
  return *this;
}

SpectralField::SpectralField(const TorusGrid& g, cvec s) : grid(g), samples(std::move(s)) {
  if (samples.size() != static_cast<std::size_t>(g.N())) throw GridError("field: length mismatch");
}

SpectralField SpectralField::from_function(const TorusGrid& g, const std::function<cplx(double)>& f) {
  SpectralField field(g);
  for (int j = 0; j < g.N(); ++j) field.samples[static_cast<std::size_t>(j)] = f(g.x(j));
  return field;
}

double SpectralField::max_imag() const {
  double m = 0.0;
  for (const auto& v : samples) m = std::max(m, std::abs(v.imag()));
  return m;
}

// ---------------------------------------------------------------------------
// FFT plan cache

namespace {

class FftPlans {
 public:
  explicit FftPlans(int n) : n_(n) {
    std::vector<fftw_complex> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(n, a.data(), b.data(), FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(n, a.data(), b.data(), FFTW_BACKWARD, flags);
  }
  ~FftPlans() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  // New-array execution is thread-safe once the plan exists.
  void run(bool forward, const cplx* in, cplx* out) const {
    auto* i = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in));
    auto* o = reinterpret_cast<fftw_complex*>(out);
    fftw_execute_dft(forward ? forward_ : backward_, i, o);
  }

 private:
  int n_;
  fftw_plan forward_;
  fftw_plan backward_;
};

const FftPlans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<FftPlans>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlans>(n)).first;
  return *it->second;
}

void run_fft(bool forward, std::span<const cplx> in, std::span<cplx> out) {
  if (in.size() != out.size()) throw GridError("fft: length mismatch");
  if (!std::has_single_bit(in.size())) throw GridError("fft: length must be a power of two");
  const int n = static_cast<int>(in.size());
  if (in.data() == out.data()) {
    cvec tmp(in.begin(), in.end());
    plans_for(n).run(forward, tmp.data(), out.data());
  } else {
    plans_for(n).run(forward, in.data(), out.data());
  }
}

}  // namespace

void fft_forward(std::span<const cplx> in, std::span<cplx> out) { run_fft(true, in, out); }
void fft_backward(std::span<const cplx> in, std::span<cplx> out) { run_fft(false, in, out); }

Spectrum to_fourier(const SpectralField& field) {
  Spectrum s(field.grid);
  fft_forward(field.samples, s.coeffs);
  const double scale = 1.0 / field.grid.N();
  for (auto& c : s.coeffs) c *= scale;
  return s;
}

SpectralField from_fourier(const Spectrum& spectrum) {
  SpectralField f(spectrum.grid);
  fft_backward(spectrum.coeffs, f.samples);
  return f;
}

// ---------------------------------------------------------------------------
// Multipliers

Spectrum apply_multiplier(const Spectrum& s, const std::function<cplx(double)>& f) {
  Spectrum out(s.grid);
  for (int j = 0; j < s.grid.N(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    out.coeffs[idx] = f(s.grid.kappa(j)) * s.coeffs[idx];
  }
  return out;
}

Spectrum derivative(const Spectrum& s, int order) {
  if (order < 0 || order > 8) throw std::invalid_argument("derivative: order must be in [0, 8]");
  Spectrum out = s;
  if (order == 0) return out;
  const cplx i{0.0, 1.0};
  for (int j = 0; j < s.grid.N(); ++j) {
    out.coeffs[static_cast<std::size_t>(j)] *= std::pow(i * s.grid.kappa(j), order);
  }
  // The Nyquist mode has no partner; odd derivatives of it are not real.
  if (order % 2 == 1) out.coeffs[static_cast<std::size_t>(s.grid.N() / 2)] = 0.0;
  return out;
}

SpectralField derivative(const SpectralField& field, int order) {
  return from_fourier(derivative(to_fourier(field), order));
}

Spectrum kernel_convolve(const Spectrum& s, const KernelMeasure& kernel) {
  return apply_multiplier(s, [&](double k) { return cplx(fourier_symbol(kernel, k)); });
}

SpectralField kernel_convolve(const SpectralField& field, const KernelMeasure& kernel) {
  return from_fourier(kernel_convolve(to_fourier(field), kernel));
}

Spectrum modulated_kernel_convolve(const Spectrum& s, const KernelMeasure& kernel, int n) {
  return apply_multiplier(s, [&](double k) { return cplx(fourier_symbol(kernel, k - n)); });
}

SpectralField modulated_kernel_convolve(const SpectralField& field, const KernelMeasure& kernel, int n) {
  return from_fourier(modulated_kernel_convolve(to_fourier(field), kernel, n));
}

cvec padded_samples(const Spectrum& s) {
  const int n = s.grid.N();
  const int big = 2 * n;
  cvec padded(static_cast<std::size_t>(big));
  for (int j = 0; j < n; ++j) {
    const int m = s.grid.mode(j);
    padded[static_cast<std::size_t>(m >= 0 ? m : m + big)] = s.coeffs[static_cast<std::size_t>(j)];
  }
  cvec samples(padded.size());
  fft_backward(padded, samples);
  return samples;
}

Spectrum from_padded_samples(const TorusGrid& grid, std::span<const cplx> samples) {
  const int n = grid.N();
  const int big = 2 * n;
  if (samples.size() != static_cast<std::size_t>(big)) throw GridError("padded samples: length mismatch");
  cvec wide(samples.size());
  fft_forward(samples, wide);
  Spectrum out(grid);
  const double scale = 1.0 / big;
  for (int j = 0; j < n; ++j) {
    const int m = grid.mode(j);
    out.coeffs[static_cast<std::size_t>(j)] = wide[static_cast<std::size_t>(m >= 0 ? m : m + big)] * scale;
  }
  return out;
}

Spectrum dealiased_product(const Spectrum& a, const Spectrum& b) {
  require_same(a.grid, b.grid, "dealiased_product");
  cvec ua = padded_samples(a);
  const cvec ub = padded_samples(b);
  for (std::size_t j = 0; j < ua.size(); ++j) ua[j] *= ub[j];
  return from_padded_samples(a.grid, ua);
}

Spectrum shift_modes(const Spectrum& s, int shift) {
  Spectrum out(s.grid);
  for (int j = 0; j < s.grid.N(); ++j) {
    const int dst = s.grid.slot(s.grid.mode(j) + shift);
    if (dst >= 0) out.coeffs[static_cast<std::size_t>(dst)] = s.coeffs[static_cast<std::size_t>(j)];
  }
  return out;
}

Spectrum conjugate(const Spectrum& s) {
  Spectrum out(s.grid);
  for (int j = 0; j < s.grid.N(); ++j) {
    int src = s.grid.slot(-s.grid.mode(j));
    if (src < 0) src = j;  // Nyquist mode is its own partner
    out.coeffs[static_cast<std::size_t>(j)] = std::conj(s.coeffs[static_cast<std::size_t>(src)]);
  }
  return out;
}

double conjugate_asymmetry(const Spectrum& s) {
  double worst = 0.0;
  for (int j = 0; j < s.grid.N(); ++j) {
    int partner = s.grid.slot(-s.grid.mode(j));
    if (partner < 0) partner = j;
    worst = std::max(worst, std::abs(s.coeffs[static_cast<std::size_t>(j)] -
                                     std::conj(s.coeffs[static_cast<std::size_t>(partner)])));
  }
  return worst;
}

double sup_norm(const SpectralField& field) {
  double m = 0.0;
  for (const auto& v : field.samples) m = std::max(m, std::abs(v));
  return m;
}

double energy(const Spectrum& s) {
  double e = 0.0;
  for (const auto& c : s.coeffs) e += std::norm(c);
  return e;
}

double c_norm(const Spectrum& s, int m) {
  if (m < 0 || m > 4) throw std::invalid_argument("c_norm: order must be in [0, 4]");
  double norm = 0.0;
  for (int order = 0; order <= m; ++order) {
    norm = std::max(norm, sup_norm(from_fourier(derivative(s, order))));
  }
  return norm;
}

double c_norm(const SpectralField& field, int m) { return c_norm(to_fourier(field), m); }

// ---------------------------------------------------------------------------
// Cutoffs

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

namespace {

/// 1 for d <= inner, 0 for d >= outer, smooth and decreasing in between.
double plateau(double d, double inner, double outer) {
  return smooth_step((outer - d) / (outer - inner));
}

double distance_to_critical(double kappa) {
  return std::min(std::abs(kappa - 1.0), std::abs(kappa + 1.0));
}

}  // namespace

double cutoff_value(CutoffName name, double kappa) {
  const double dc = distance_to_critical(kappa);
  switch (name) {
    case CutoffName::chi_c:
      return plateau(dc, 0.125, 0.25);
    case CutoffName::chi_0:
      return plateau(std::abs(kappa), 0.125, 0.25);
    case CutoffName::chi_s:
      return 1.0 - plateau(dc, 0.125, 0.25);
    case CutoffName::chi_0c:
      return plateau(std::abs(kappa), 0.125, 0.25) - 1.0;
    case CutoffName::chi_c_h:
      return plateau(dc, 0.25, 0.375);
    case CutoffName::chi_s_h:
      return 1.0 - plateau(dc, 0.0625, 0.125);
  }
  throw std::invalid_argument("cutoff_value: unknown cutoff");
}

CutoffName cutoff_from_string(std::string_view name) {
  if (name == "chi_c") return CutoffName::chi_c;
  if (name == "chi_0") return CutoffName::chi_0;
  if (name == "chi_s") return CutoffName::chi_s;
  if (name == "chi_0c") return CutoffName::chi_0c;
  if (name == "chi_c_h") return CutoffName::chi_c_h;
  if (name == "chi_s_h") return CutoffName::chi_s_h;
  throw std::invalid_argument("unknown cutoff name '" + std::string(name) + "'");
}

std::string to_string(CutoffName name) {
  switch (name) {
    case CutoffName::chi_c: return "chi_c";
    case CutoffName::chi_0: return "chi_0";
    case CutoffName::chi_s: return "chi_s";
    case CutoffName::chi_0c: return "chi_0c";
    case CutoffName::chi_c_h: return "chi_c_h";
    case CutoffName::chi_s_h: return "chi_s_h";
  }
  return "?";
}

CutoffProfile make_cutoff(CutoffName name, const TorusGrid& grid) {
  CutoffProfile p{name, grid, std::vector<double>(static_cast<std::size_t>(grid.N()))};
  for (int j = 0; j < grid.N(); ++j) p.values[static_cast<std::size_t>(j)] = cutoff_value(name, grid.kappa(j));
  return p;
}

CutoffProfile make_cutoff(std::string_view name, const TorusGrid& grid) {
  return make_cutoff(cutoff_from_string(name), grid);
}

Spectrum apply_filter(const Spectrum& s, const CutoffProfile& profile) {
  require_same(s.grid, profile.grid, "apply_filter");
  Spectrum out = s;
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) out.coeffs[j] *= profile.values[j];
  return out;
}

SpectralField apply_filter(const SpectralField& field, const CutoffProfile& profile) {
  return from_fourier(apply_filter(to_fourier(field), profile));
}

Spectrum apply_semigroup(const Spectrum& s, double t, double eps, const CutoffProfile& heat_profile) {
  if (t < 0.0) throw std::invalid_argument("apply_semigroup: t must be >= 0");
  require_same(s.grid, heat_profile.grid, "apply_semigroup");
  Spectrum out = s;
  for (int j = 0; j < s.grid.N(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    out.coeffs[idx] *= std::exp(linear_symbol(s.grid.kappa(j), eps) * t) * heat_profile.values[idx];
  }
  return out;
}

SpectralField apply_semigroup(const SpectralField& field, double t, double eps,
                              const CutoffProfile& heat_profile) {
  return from_fourier(apply_semigroup(to_fourier(field), t, eps, heat_profile));
}

}  // namespace nlsh
