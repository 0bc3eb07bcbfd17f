#include "nlsh/approx.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlsh {

namespace {

const cplx I{0.0, 1.0};

Spectrum mul(const Spectrum& a, const Spectrum& b) { return dealiased_product(a, b); }

Spectrum conv(const KernelMeasure& k, int n, const Spectrum& b) { return modulated_kernel_convolve(b, k, n); }

Spectrum conv(const KernelMeasure& k, const Spectrum& b) { return kernel_convolve(b, k); }

Spectrum linear_part(const Spectrum& u, double eps) {
  return apply_multiplier(u, [eps](double k) { return cplx(linear_symbol(k, eps)); });
}

Spectrum filter(const Spectrum& s, CutoffName name) { return apply_filter(s, make_cutoff(name, s.grid)); }

/// c e^{i l x} + conj, for an envelope c given on the fast grid.
Spectrum harmonic_pair(const Spectrum& c, int l) {
  const int shift = l * c.grid.M();
  return shift_modes(c, shift) + shift_modes(conjugate(c), -shift);
}

}  // namespace

void check_scales(const TorusGrid& slow, const TorusGrid& fast, double eps) {
  const double lhs = eps * fast.M();
  if (std::abs(lhs - slow.M()) > 1e-12 * slow.M())
    throw GridError("eps * M = " + std::to_string(lhs) + " does not match slow factor P = " + std::to_string(slow.M()));
}

TorusGrid default_fast_grid(int M, double ceiling) {
  int N = 2;
  while (static_cast<double>(N) / (2.0 * M) < ceiling) N *= 2;
  return TorusGrid(M, N);
}

Spectrum lift(const Spectrum& slow, const TorusGrid& fast) {
  Spectrum out(fast);
  const int n = slow.grid.N();
  for (int j = 0; j < n; ++j) {
    const int m = slow.grid.mode(j);
    if (m == -n / 2) continue;  // unpaired Nyquist mode
    const int dst = fast.slot(m);
    if (dst < 0) throw GridError("lift: slow mode beyond the fast band");
    out.coeffs[static_cast<std::size_t>(dst)] = slow.coeffs[static_cast<std::size_t>(j)];
  }
  return out;
}

Spectrum psi_spectrum(const Spectrum& A, double eps, const TorusGrid& fast) {
  check_scales(A.grid, fast, eps);
  return eps * harmonic_pair(lift(A, fast), 1);
}

SpectralField build_psi(const Spectrum& A, double eps, const TorusGrid& fast) {
  return from_fourier(psi_spectrum(A, eps, fast));
}

PhiParts build_phi(const Spectrum& A, const Spectrum& A0, const Spectrum& A2, double eps, const TorusGrid& fast) {
  check_scales(A.grid, fast, eps);
  const auto chi0 = make_cutoff(CutoffName::chi_0, fast);
  const Spectrum EA = apply_filter(lift(A, fast), chi0);
  const Spectrum EA2 = apply_filter(lift(A2, fast), chi0);
  Spectrum EA0 = apply_filter(lift(A0, fast), chi0);
  EA0 = 0.5 * (EA0 + conjugate(EA0));

  PhiParts p{Spectrum(fast), harmonic_pair(EA, 1), harmonic_pair(EA2, 2) + EA0};
  p.phi = eps * p.phi_c + (eps * eps) * p.phi_s;
  return p;
}

// ---------------------------------------------------------------------------

Ansatz::Ansatz(double eps, const TorusGrid& fast, KernelMeasure Q, KernelMeasure K, GLTrajectory trajectory)
    : eps_(eps), fast_(fast), Q_(std::move(Q)), K_(std::move(K)), trajectory_(std::move(trajectory)) {
  if (trajectory_.A.empty()) throw std::invalid_argument("ansatz: empty GL trajectory");
  check_scales(trajectory_.A.front().grid, fast_, eps_);
  q1_ = fourier_symbol(Q_, 1.0);
  gamma_ = gl_cubic_coefficient(Q_, K_);
}

double Ansatz::time(std::size_t k) const { return trajectory_.times.at(k) / (eps_ * eps_); }

std::size_t Ansatz::snapshot_at(double t) const {
  const double T = eps_ * eps_ * t;
  const auto& ts = trajectory_.times;
  const auto it = std::lower_bound(ts.begin(), ts.end(), T - 1e-9);
  if (it == ts.end() || std::abs(*it - T) > 1e-9)
    throw std::out_of_range("ansatz: no GL snapshot at t = " + std::to_string(t));
  return static_cast<std::size_t>(it - ts.begin());
}

CorrectorPair Ansatz::correctors_at(std::size_t k) const { return correctors(amplitude(k), q1_); }

Spectrum Ansatz::psi(std::size_t k) const { return psi_spectrum(amplitude(k), eps_, fast_); }

PhiParts Ansatz::phi(std::size_t k) const {
  const auto c = correctors_at(k);
  return build_phi(amplitude(k), c.A0, c.A2, eps_, fast_);
}

NormPair norm_pair(const Spectrum& s) {
  const double c0 = sup_norm(from_fourier(s));
  return {c0, std::max(c0, sup_norm(from_fourier(derivative(s, 1))))};
}

// ---------------------------------------------------------------------------
// Residual

namespace {

/// E0-filtered envelopes of one snapshot, on the fast grid.
struct Envelopes {
  Spectrum A, Ab, A0, A2, A2b, dA, dAb, dA0, dA2, dA2b;
};

Envelopes envelopes(const Ansatz& an, std::size_t k) {
  const auto& A = an.amplitude(k);
  const auto dA = gl_rhs(A, an.gamma());
  const auto c = correctors(A, an.q1());
  const auto dc = corrector_time_derivatives(A, dA, an.q1());
  const auto chi0 = make_cutoff(CutoffName::chi_0, an.fast());
  auto E = [&](const Spectrum& s) { return apply_filter(lift(s, an.fast()), chi0); };
  Envelopes e{E(A), Spectrum(an.fast()), E(c.A0), E(c.A2), Spectrum(an.fast()),
              E(dA), Spectrum(an.fast()), E(dc.A0), E(dc.A2), Spectrum(an.fast())};
  e.Ab = conjugate(e.A);
  e.A2b = conjugate(e.A2);
  e.dAb = conjugate(e.dA);
  e.A0 = 0.5 * (e.A0 + conjugate(e.A0));
  e.dA0 = 0.5 * (e.dA0 + conjugate(e.dA0));
  return e;
}

struct PositivePrefactors {
  Spectrum a1, a1_truncated, a2, a3;
};

/// a_1, a_2, a_3 for sign = +1. With sign = -1 and conjugated envelopes
/// (A <-> conj A, A2 <-> conj A2) the same expressions yield a_{-1..-3}.
PositivePrefactors positive_prefactors(const Spectrum& A, const Spectrum& Ab, const Spectrum& A0,
                                       const Spectrum& A2, const Spectrum& dA, int sign, double eps,
                                       const KernelMeasure& Q, const KernelMeasure& K) {
  const double e2 = eps * eps, e3 = e2 * eps;
  const int s = sign;

  const Spectrum AA = mul(A, A);
  Spectrum a1_core = -1.0 * dA + (4.0 / e2) * derivative(A, 2) + A;
  a1_core -= mul(Ab, conv(Q, -2 * s, A2));
  a1_core -= mul(A, conv(Q, 0, A0));
  a1_core -= mul(A0, conv(Q, -1 * s, A));
  a1_core -= 2.0 * mul(A, conv(K, 0, mul(A, Ab)));
  a1_core -= mul(Ab, conv(K, -2 * s, AA));

  PositivePrefactors p{Spectrum(A.grid), Spectrum(A.grid), Spectrum(A.grid), Spectrum(A.grid)};
  p.a1_truncated = e3 * a1_core;
  p.a1 = e3 * (a1_core - mul(A2, conv(Q, 1 * s, Ab)));

  p.a2 = (-9.0 * e2) * A2 + (24.0 * e2 * static_cast<double>(s)) * I * derivative(A2, 1) -
         e2 * mul(A, conv(Q, -1 * s, A));
  // d_X = eps^-1 d_x, so 24 i eps^3 d_X A2 = 24 i eps^2 d_x A2 above.

  p.a3 = -e3 * (mul(A, conv(Q, -2 * s, A2)) + mul(A2, conv(Q, -1 * s, A)) + mul(A, conv(K, -2 * s, AA)));
  return p;
}

double energy_outside(const Spectrum& a, double radius) {
  double out = 0.0;
  for (int j = 0; j < a.grid.N(); ++j)
    if (std::abs(a.grid.kappa(j)) > radius) out += std::norm(a.coeffs[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace

Spectrum phi_time_derivative(const Ansatz& an, std::size_t k) {
  const auto e = envelopes(an, k);
  const double eps = an.eps();
  return (eps * eps * eps) * harmonic_pair(e.dA, 1) +
         (eps * eps * eps * eps) * (harmonic_pair(e.dA2, 2) + e.dA0);
}

ResidualReport residual_at(const Ansatz& an, std::size_t k) {
  const double eps = an.eps();
  const auto& fast = an.fast();
  const auto e = envelopes(an, k);

  PhiParts phi{Spectrum(fast), harmonic_pair(e.A, 1), harmonic_pair(e.A2, 2) + e.A0};
  phi.phi = eps * phi.phi_c + (eps * eps) * phi.phi_s;
  const Spectrum dphi = (eps * eps * eps) * harmonic_pair(e.dA, 1) +
                        (eps * eps * eps * eps) * (harmonic_pair(e.dA2, 2) + e.dA0);

  ResidualReport r(fast);
  r.t = an.time(k);
  r.res = -1.0 * dphi + linear_part(phi.phi, eps) + SHNonlinearity(fast, an.Q(), an.K())(phi.phi);
  r.ec = filter(r.res, CutoffName::chi_c);
  r.es = filter(r.res, CutoffName::chi_s);

  const auto& Q = an.Q();
  const auto& K = an.K();
  const double e2 = eps * eps;
  r.a[3] = -e2 * (e.A0 + mul(e.A, conv(Q, 1, e.Ab)) + mul(e.Ab, conv(Q, -1, e.A)));

  const auto pos = positive_prefactors(e.A, e.Ab, e.A0, e.A2, e.dA, +1, eps, Q, K);
  const auto neg = positive_prefactors(e.Ab, e.A, e.A0, e.A2b, e.dAb, -1, eps, Q, K);
  r.a[4] = pos.a1;
  r.a[5] = pos.a2;
  r.a[6] = pos.a3;
  r.a[2] = neg.a1;
  r.a[1] = neg.a2;
  r.a[0] = neg.a3;
  r.a1_truncated = pos.a1_truncated;
  r.am1_truncated = neg.a1_truncated;

  Spectrum sum(fast), sum_truncated(fast);
  for (int l = -3; l <= 3; ++l) {
    const auto& a = r.a[static_cast<std::size_t>(l + 3)];
    sum += shift_modes(a, l * fast.M());
    if (l == 1)
      sum_truncated += shift_modes(r.a1_truncated, fast.M());
    else if (l == -1)
      sum_truncated += shift_modes(r.am1_truncated, -fast.M());
    else
      sum_truncated += shift_modes(a, l * fast.M());
  }
  r.remainder = r.res - sum;
  r.remainder_truncated = r.res - sum_truncated;

  r.res_norm = norm_pair(r.res);
  r.ec_norm = norm_pair(r.ec);
  r.es_norm = norm_pair(r.es);
  r.remainder_norm = norm_pair(r.remainder);
  r.remainder_truncated_norm = norm_pair(r.remainder_truncated);
  double largest = 0.0, leak = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    r.a_norm[i] = norm_pair(r.a[i]);
    largest = std::max(largest, energy(r.a[i]));
    leak = std::max(leak, energy_outside(r.a[i], 0.75 + 1.0 / fast.M()));
  }
  r.support_leak = largest > 0.0 ? leak / largest : 0.0;
  for (std::size_t l = 0; l <= 3; ++l) {
    const Spectrum diff = r.a[3 - l] - conjugate(r.a[3 + l]);
    double worst = 0.0;
    for (const auto& c : diff.coeffs) worst = std::max(worst, std::abs(c));
    r.conjugate_pairing = std::max(r.conjugate_pairing, worst);
  }
  return r;
}

ResidualReport residual(const Ansatz& ansatz, double t) { return residual_at(ansatz, ansatz.snapshot_at(t)); }

Forcings split_forcings(const ResidualReport& report, double eps) {
  return {std::pow(eps, -4) * report.ec, std::pow(eps, -3) * report.es};
}

// ---------------------------------------------------------------------------
// Error equation

ErrorComponents error_components(const Spectrum& u, const Spectrum& phi, double eps) {
  if (!(u.grid == phi.grid)) throw GridError("error_components: grid mismatch");
  ErrorComponents c{u - phi, Spectrum(u.grid), Spectrum(u.grid)};
  c.Rc = (1.0 / (eps * eps)) * filter(c.R, CutoffName::chi_c);
  c.Rs = (1.0 / (eps * eps * eps)) * filter(c.R, CutoffName::chi_s);
  for (int m = 0; m <= 4; ++m) {
    const auto i = static_cast<std::size_t>(m);
    c.R_norms[i] = sup_norm(from_fourier(derivative(c.R, m)));
    c.Rc_norms[i] = sup_norm(from_fourier(derivative(c.Rc, m)));
    c.Rs_norms[i] = sup_norm(from_fourier(derivative(c.Rs, m)));
    if (m > 0) {
      c.R_norms[i] = std::max(c.R_norms[i], c.R_norms[i - 1]);
      c.Rc_norms[i] = std::max(c.Rc_norms[i], c.Rc_norms[i - 1]);
      c.Rs_norms[i] = std::max(c.Rs_norms[i], c.Rs_norms[i - 1]);
    }
  }
  return c;
}

ErrorOperators error_operators(const Spectrum& Rc, const Spectrum& Rs, const PhiParts& phi, double eps,
                               const KernelMeasure& Q, const KernelMeasure& K) {
  const Spectrum& pc = phi.phi_c;
  const Spectrum& ps = phi.phi_s;
  const Spectrum R = Rc + eps * Rs;     // R_c + eps R_s
  const Spectrum P = pc + eps * ps;     // phi_c + eps phi_s

  ErrorOperators op{Spectrum(Rc.grid), Spectrum(Rc.grid), Spectrum(Rc.grid), Spectrum(Rc.grid)};
  op.L2 = mul(Rc, conv(Q, pc)) + mul(pc, conv(Q, Rc));
  op.N2 = mul(Rc, conv(Q, Rc));
  op.L1 = mul(Rc, conv(Q, ps)) + mul(Rs, conv(Q, pc)) + mul(ps, conv(Q, Rc)) + mul(pc, conv(Q, Rs)) +
          mul(Rc, conv(K, mul(pc, pc))) + 2.0 * mul(pc, conv(K, mul(Rc, pc)));

  const Spectrum RR = mul(R, R);
  // The cross term Rc Q*Rs belongs to the eps^5 part of R Q*R.
  Spectrum n1 = mul(Rs, conv(Q, R)) + mul(Rc, conv(Q, Rs));
  n1 += eps * mul(R, conv(K, RR));
  n1 += mul(Rs, conv(Q, ps));
  n1 += mul(ps, conv(Q, Rs));
  n1 += 2.0 * mul(R, conv(K, mul(R, P)));
  n1 += mul(Rc, conv(K, 2.0 * mul(pc, ps) + eps * mul(ps, ps)));
  n1 += mul(Rs, conv(K, mul(P, P)));
  n1 += 2.0 * mul(pc, conv(K, mul(Rc, ps) + mul(Rs, pc) + eps * mul(Rs, ps)));
  n1 += 2.0 * mul(ps, conv(K, mul(R, P)));
  // phi K*R^2 enters N(phi + R) - N(phi) once.
  n1 += mul(P, conv(K, RR));
  op.N1 = -1.0 * n1;
  return op;
}

ErrorEquationDefect error_equation_check(const SHTrajectory& u, const Ansatz& an, double t) {
  const auto& ts = u.times;
  const auto it = std::min_element(ts.begin(), ts.end(), [t](double a, double b) { return std::abs(a - t) < std::abs(b - t); });
  if (it == ts.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, t))
    throw std::out_of_range("error_equation_check: no SH snapshot at t = " + std::to_string(t));
  const auto k = static_cast<std::size_t>(it - ts.begin());
  if (k == 0 || k + 1 >= ts.size()) throw std::out_of_range("error_equation_check: t needs snapshots on both sides");
  const double h = ts[k + 1] - ts[k];
  if (std::abs((ts[k] - ts[k - 1]) - h) > 1e-9 * h)
    throw std::invalid_argument("error_equation_check: snapshots around t are not equally spaced");

  const double eps = an.eps();
  auto components = [&](std::size_t j) {
    const auto g = an.snapshot_at(ts[j]);
    return error_components(u.spectra[j], an.phi(g).phi, eps);
  };
  const auto before = components(k - 1);
  const auto now = components(k);
  const auto after = components(k + 1);
  const Spectrum dRc = (0.5 / h) * (after.Rc - before.Rc);
  const Spectrum dRs = (0.5 / h) * (after.Rs - before.Rs);

  const std::size_t g = an.snapshot_at(ts[k]);
  const PhiParts phi = an.phi(g);
  const auto rep = residual_at(an, g);
  const auto forcing = split_forcings(rep, eps);
  const auto op = error_operators(now.Rc, now.Rs, phi, eps, an.Q(), an.K());

  const auto Ec = make_cutoff(CutoffName::chi_c, an.fast());
  const auto Es = make_cutoff(CutoffName::chi_s, an.fast());
  const double e2 = eps * eps, e3 = e2 * eps;

  const Spectrum rhs_c = linear_part(now.Rc, eps) - e2 * apply_filter(op.L1, Ec) + e3 * apply_filter(op.N1, Ec) +
                         e2 * forcing.delta_c;
  const Spectrum Ns = -1.0 * apply_filter(op.L1 + op.N2, Es) + eps * apply_filter(op.N1, Es);
  const Spectrum rhs_s = linear_part(now.Rs, eps) - apply_filter(op.L2, Es) + eps * Ns + forcing.delta_s;

  ErrorEquationDefect d;
  d.t = ts[k];
  d.spacing = h;
  d.defect_c = sup_norm(from_fourier(dRc - rhs_c));
  d.defect_s = sup_norm(from_fourier(dRs - rhs_s));
  d.scale_c = sup_norm(from_fourier(dRc));
  d.scale_s = sup_norm(from_fourier(dRs));
  return d;
}

// ---------------------------------------------------------------------------

ConvolutionGap convolution_approx_gap(const Spectrum& B1, const Spectrum& B2, const Spectrum& B3,
                                      const KernelMeasure& kernel, int n, double eps) {
  if (!(B1.grid == B2.grid) || !(B1.grid == B3.grid)) throw GridError("convolution_approx_gap: grid mismatch");
  const int P = B1.grid.M();
  const int M = static_cast<int>(std::lround(P / eps));
  const TorusGrid fast = default_fast_grid(M, 4.0);
  check_scales(B1.grid, fast, eps);
  const Spectrum b1 = lift(B1, fast), b2 = lift(B2, fast), b3 = lift(B3, fast);
  const double qn = fourier_symbol(kernel, n);

  const Spectrum quad = mul(b1, conv(kernel, n, b2)) - qn * mul(b1, b2);
  const Spectrum b23 = mul(b2, b3);
  const Spectrum cubic = mul(b1, conv(kernel, n, b23)) - qn * mul(b1, b23);
  return {norm_pair(quad).c1, norm_pair(cubic).c1};
}

}  // namespace nlsh
