#pragma once

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nlsh/kernel.hpp"

namespace nlsh {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Periodic domain [0, 2 pi M) sampled at N points. Wavenumbers are j / M for
/// signed index j in [-N/2, N/2), so kappa = +-1, +-2, +-3 lie on the grid.
class TorusGrid {
 public:
  /// Fast-scale grids must resolve |kappa| up to 4.
  static constexpr double kMinCeiling = 4.0;

  TorusGrid(int M, int N, double min_ceiling = kMinCeiling);

  /// Grid for the slow variable X on [0, 2 pi P); no resolution floor.
  static TorusGrid slow(int P, int N) { return TorusGrid(P, N, 0.0); }

  int M() const { return M_; }
  int N() const { return N_; }
  double length() const;
  double x(int j) const;
  /// Signed mode index of FFT slot j.
  int mode(int j) const { return j < N_ / 2 ? j : j - N_; }
  /// FFT slot holding signed mode m, or -1 when m is not representable.
  int slot(int m) const;
  double kappa(int j) const { return static_cast<double>(mode(j)) / M_; }
  double ceiling() const { return static_cast<double>(N_) / (2.0 * M_); }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
    return a.M_ == b.M_ && a.N_ == b.N_;
  }

 private:
  int M_;
  int N_;
};

/// Fourier coefficients c_j such that u(x) = sum_j c_j exp(i kappa_j x).
struct Spectrum {
  TorusGrid grid;
  cvec coeffs;

  explicit Spectrum(const TorusGrid& g) : grid(g), coeffs(static_cast<std::size_t>(g.N())) {}
  Spectrum(const TorusGrid& g, cvec c);

  Spectrum& operator+=(const Spectrum& o);
  Spectrum& operator-=(const Spectrum& o);
  Spectrum& operator*=(cplx s);
  friend Spectrum operator+(Spectrum a, const Spectrum& b) { return a += b; }
  friend Spectrum operator-(Spectrum a, const Spectrum& b) { return a -= b; }
  friend Spectrum operator*(cplx s, Spectrum a) { return a *= s; }
  friend Spectrum operator*(double s, Spectrum a) { return a *= s; }
};

/// Grid samples of a (possibly complex) field.
struct SpectralField {
  TorusGrid grid;
  cvec samples;

  explicit SpectralField(const TorusGrid& g) : grid(g), samples(static_cast<std::size_t>(g.N())) {}
  SpectralField(const TorusGrid& g, cvec s);

  static SpectralField from_function(const TorusGrid& g, const std::function<cplx(double)>& f);

  double max_imag() const;
};

Spectrum to_fourier(const SpectralField& field);
SpectralField from_fourier(const Spectrum& spectrum);

/// Raw unnormalised transforms, n must be a power of two. Plans are cached
/// per size and shared between threads.
void fft_forward(std::span<const cplx> in, std::span<cplx> out);
void fft_backward(std::span<const cplx> in, std::span<cplx> out);

Spectrum derivative(const Spectrum& s, int order);
SpectralField derivative(const SpectralField& field, int order);

/// Multiplies each coefficient by f(kappa).
Spectrum apply_multiplier(const Spectrum& s, const std::function<cplx(double)>& f);

/// (Q * u)^(kappa) = q(kappa) u^(kappa).
Spectrum kernel_convolve(const Spectrum& s, const KernelMeasure& kernel);
SpectralField kernel_convolve(const SpectralField& field, const KernelMeasure& kernel);

/// ((Q e^{in.}) * u)^(kappa) = q(kappa - n) u^(kappa).
Spectrum modulated_kernel_convolve(const Spectrum& s, const KernelMeasure& kernel, int n);
SpectralField modulated_kernel_convolve(const SpectralField& field, const KernelMeasure& kernel, int n);

/// Pointwise product formed on a grid zero-padded by a factor two and then
/// truncated back, so quadratic products are free of aliasing.
Spectrum dealiased_product(const Spectrum& a, const Spectrum& b);

/// Samples on the grid refined by a factor two (zero-padded spectrum), and the
/// inverse: transform and truncate back to the grid's band.
cvec padded_samples(const Spectrum& s);
Spectrum from_padded_samples(const TorusGrid& grid, std::span<const cplx> samples);

/// Shifts the spectrum by `shift` modes: multiplication by exp(i shift x / M).
/// Modes pushed past the grid band are dropped.
Spectrum shift_modes(const Spectrum& s, int shift);

/// Coefficients of the complex conjugate field.
Spectrum conjugate(const Spectrum& s);

/// Max |c_j - conj(c_{-j})|; zero for real fields.
double conjugate_asymmetry(const Spectrum& s);

double sup_norm(const SpectralField& field);
double energy(const Spectrum& s);

/// Max over derivative orders 0..m of the grid sup-norm; 0 <= m <= 4.
double c_norm(const Spectrum& s, int m);
double c_norm(const SpectralField& field, int m);

// ---------------------------------------------------------------------------
// Mode filters

enum class CutoffName { chi_c, chi_0, chi_s, chi_0c, chi_c_h, chi_s_h };

CutoffName cutoff_from_string(std::string_view name);
std::string to_string(CutoffName name);

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t).
double smooth_step(double t);

/// Value of the named cutoff at an arbitrary wavenumber.
double cutoff_value(CutoffName name, double kappa);

struct CutoffProfile {
  CutoffName name;
  TorusGrid grid;
  std::vector<double> values;
};

CutoffProfile make_cutoff(CutoffName name, const TorusGrid& grid);
CutoffProfile make_cutoff(std::string_view name, const TorusGrid& grid);

Spectrum apply_filter(const Spectrum& s, const CutoffProfile& profile);
SpectralField apply_filter(const SpectralField& field, const CutoffProfile& profile);

/// exp(L t) chi^h with L's symbol -(1 - kappa^2)^2 + eps^2.
Spectrum apply_semigroup(const Spectrum& s, double t, double eps, const CutoffProfile& heat_profile);
SpectralField apply_semigroup(const SpectralField& field, double t, double eps,
                              const CutoffProfile& heat_profile);

}  // namespace nlsh
