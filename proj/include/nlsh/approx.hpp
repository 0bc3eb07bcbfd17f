#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "nlsh/glsolver.hpp"
#include "nlsh/kernel.hpp"
#include "nlsh/shsolver.hpp"
#include "nlsh/spectral.hpp"

namespace nlsh {

/// Throws GridError unless eps * fast.M() == slow.M() (to 1e-12 relative),
/// i.e. the slow domain 2 pi P is exactly the rescaled fast domain.
void check_scales(const TorusGrid& slow, const TorusGrid& fast, double eps);

/// Rewrites a function of X = eps x on the fast grid. Slow mode m has
/// kappa_X = m / P and lands on fast mode m (kappa = m / M).
Spectrum lift(const Spectrum& slow, const TorusGrid& fast);

/// psi = eps (A(eps x) e^{ix} + c.c.)
Spectrum psi_spectrum(const Spectrum& A, double eps, const TorusGrid& fast);
SpectralField build_psi(const Spectrum& A, double eps, const TorusGrid& fast);

struct PhiParts {
  Spectrum phi;
  Spectrum phi_c;
  Spectrum phi_s;
};

/// phi_c = (E0 A) e^{ix} + c.c.,  phi_s = (E0 A2) e^{2ix} + c.c. + E0 A0,
/// phi = eps phi_c + eps^2 phi_s.  A, A0, A2 live on the slow grid.
PhiParts build_phi(const Spectrum& A, const Spectrum& A0, const Spectrum& A2, double eps, const TorusGrid& fast);

/// The refined approximation along a GL trajectory. Snapshot k of the
/// trajectory (slow time T_k) corresponds to fast time t_k = T_k / eps^2.
class Ansatz {
 public:
  Ansatz(double eps, const TorusGrid& fast, KernelMeasure Q, KernelMeasure K, GLTrajectory trajectory);

  double eps() const { return eps_; }
  double gamma() const { return gamma_; }
  double q1() const { return q1_; }
  const TorusGrid& fast() const { return fast_; }
  const TorusGrid& slow() const { return trajectory_.A.front().grid; }
  const KernelMeasure& Q() const { return Q_; }
  const KernelMeasure& K() const { return K_; }
  const GLTrajectory& trajectory() const { return trajectory_; }
  std::size_t size() const { return trajectory_.times.size(); }

  double time(std::size_t k) const;
  /// Snapshot whose fast time equals t (to 1e-9 in slow time); throws std::out_of_range.
  std::size_t snapshot_at(double t) const;

  const Spectrum& amplitude(std::size_t k) const { return trajectory_.A.at(k); }
  CorrectorPair correctors_at(std::size_t k) const;
  Spectrum psi(std::size_t k) const;
  PhiParts phi(std::size_t k) const;

 private:
  double eps_;
  TorusGrid fast_;
  KernelMeasure Q_;
  KernelMeasure K_;
  GLTrajectory trajectory_;
  double q1_;
  double gamma_;
};

struct NormPair {
  double c0 = 0.0;
  double c1 = 0.0;
};

NormPair norm_pair(const Spectrum& s);

/// Res(phi) at one snapshot, its filtered parts, and the harmonic
/// decomposition Res = sum_{l=-3..3} a_l e^{ilx} + remainder.
struct ResidualReport {
  explicit ResidualReport(const TorusGrid& g)
      : res(g), ec(g), es(g), a{Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g)},
        a1_truncated(g), am1_truncated(g), remainder(g), remainder_truncated(g) {}

  double t = 0.0;
  Spectrum res;
  Spectrum ec;
  Spectrum es;
  /// a[l + 3] for l = -3..3, with the complete quadratic expansion of a_1.
  std::array<Spectrum, 7> a;
  /// a_1 and a_{-1} with the term A2 (Q e^{-i.}) * conj(A) omitted.
  Spectrum a1_truncated;
  Spectrum am1_truncated;
  Spectrum remainder;
  Spectrum remainder_truncated;

  NormPair res_norm, ec_norm, es_norm, remainder_norm, remainder_truncated_norm;
  std::array<NormPair, 7> a_norm;
  /// max over l of the coefficient distance between a_{-l} and conj(a_l).
  double conjugate_pairing = 0.0;
  /// Largest energy of an a_l outside |kappa| <= 3/4 + 1/M, relative to the
  /// largest total energy among the a_l.
  double support_leak = 0.0;
};

ResidualReport residual(const Ansatz& ansatz, double t);
ResidualReport residual_at(const Ansatz& ansatz, std::size_t k);

/// d_t phi at snapshot k via the chain rule through the GL right-hand side.
Spectrum phi_time_derivative(const Ansatz& ansatz, std::size_t k);

struct Forcings {
  Spectrum delta_c;  // eps^-4 E_c Res
  Spectrum delta_s;  // eps^-3 E_s Res
};

Forcings split_forcings(const ResidualReport& report, double eps);

struct ErrorComponents {
  Spectrum R;
  Spectrum Rc;  // E_c R / eps^2
  Spectrum Rs;  // E_s R / eps^3
  std::array<double, 5> R_norms{};   // C^0 .. C^4
  std::array<double, 5> Rc_norms{};
  std::array<double, 5> Rs_norms{};
};

ErrorComponents error_components(const Spectrum& u, const Spectrum& phi, double eps);

/// The linear and nonlinear operators of the error equation.
struct ErrorOperators {
  Spectrum L2;  // Rc Q*phi_c + phi_c Q*Rc
  Spectrum N2;  // Rc Q*Rc
  Spectrum L1;
  Spectrum N1;
};

ErrorOperators error_operators(const Spectrum& Rc, const Spectrum& Rs, const PhiParts& phi, double eps,
                               const KernelMeasure& Q, const KernelMeasure& K);

struct ErrorEquationDefect {
  double t = 0.0;
  double spacing = 0.0;
  double defect_c = 0.0;  // C^0 of (centred d_t R_c) - (right side)
  double defect_s = 0.0;
  double scale_c = 0.0;   // C^0 of the centred d_t R_c
  double scale_s = 0.0;
  double defect() const { return std::max(defect_c, defect_s); }
};

/// Compares centred differences of R_c, R_s over the SH snapshots k-1, k+1
/// (which must be equally spaced and matched by GL snapshots) with the right
/// sides of the split error equations at snapshot k.
ErrorEquationDefect error_equation_check(const SHTrajectory& u, const Ansatz& ansatz, double t);

struct ConvolutionGap {
  double quad_gap = 0.0;
  double cubic_gap = 0.0;
};

/// C^1 distance between B1(eps.) (Q e^{in.}) * B2(eps.) and q_n (B1 B2)(eps.),
/// and between B1(eps.) (Q e^{in.}) * (B2 B3)(eps.) and q_n (B1 B2 B3)(eps.).
/// The B's live on a slow grid of length 2 pi P; the fast grid has M = P / eps.
ConvolutionGap convolution_approx_gap(const Spectrum& B1, const Spectrum& B2, const Spectrum& B3,
                                      const KernelMeasure& kernel, int n, double eps);

/// Fast grid with the smallest power-of-two N such that N / (2M) >= ceiling.
TorusGrid default_fast_grid(int M, double ceiling = 8.0);

}  // namespace nlsh
