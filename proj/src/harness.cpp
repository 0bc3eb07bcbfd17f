#include "nlsh/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <fftw3.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "nlsh/approx.hpp"
#include "nlsh/shsolver.hpp"
#include "nlsh/spectral.hpp"

namespace nlsh {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("run config: " + what); };
  if (P < 1) fail("P must be a positive integer");
  if (M_list.empty()) fail("M_list is empty");
  for (std::size_t i = 0; i < M_list.size(); ++i) {
    if (M_list[i] <= P) fail("every M must exceed P so that eps = P / M < 1");
    if (i > 0 && M_list[i] <= M_list[i - 1]) fail("M_list must be strictly increasing");
  }
  if (!(T_star > 0.0)) fail("T_star must be positive");
  if (!(d >= 0.0)) fail("d must be non-negative");
  if (slow_N < 8 || slow_N % 2 != 0) fail("slow_N must be even and >= 8");
  if (!(grid_ceiling >= TorusGrid::kMinCeiling)) fail("grid_ceiling must be >= 4");
  if (!N_list.empty() && N_list.size() != M_list.size()) fail("N_list must match M_list in length");
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    if (N_list[i] % 2 != 0 || N_list[i] < 2 * TorusGrid::kMinCeiling * M_list[i])
      fail("N_list entries must be even with N >= 8 M");
  }
  if (!(dt > 0.0)) fail("dt must be positive");
  if (snapshot_stride && *snapshot_stride < 1) fail("snapshot_stride must be >= 1");
  if (min_snapshots < 1) fail("min_snapshots must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
}

int RunConfig::fast_N(std::size_t i) const {
  if (!N_list.empty()) return N_list.at(i);
  return default_fast_grid(M_list.at(i), grid_ceiling).N();
}

RunConfig run_config_from_json(const json& j) {
  static const std::set<std::string> known{"P",      "M_list",       "Q",    "K",        "T_star",
                                           "amplitude", "d",         "seed", "slow_N",   "grid_ceiling",
                                           "N_list", "dt", "snapshot_stride", "min_snapshots", "threads"};
  if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
  for (const auto& item : j.items())
    if (!known.contains(item.key())) throw std::invalid_argument("run config: unknown key '" + item.key() + "'");

  RunConfig c;
  c.P = j.value("P", c.P);
  if (j.contains("M_list")) c.M_list = j.at("M_list").get<std::vector<int>>();
  if (j.contains("Q")) c.Q = kernel_from_json(j.at("Q"));
  if (j.contains("K")) c.K = kernel_from_json(j.at("K"));
  c.T_star = j.value("T_star", c.T_star);
  if (j.contains("amplitude")) c.amplitude = amplitude_preset_from_json(j.at("amplitude"));
  c.d = j.value("d", c.d);
  c.seed = j.value("seed", c.seed);
  c.slow_N = j.value("slow_N", c.slow_N);
  c.grid_ceiling = j.value("grid_ceiling", c.grid_ceiling);
  if (j.contains("N_list")) c.N_list = j.at("N_list").get<std::vector<int>>();
  c.dt = j.value("dt", c.dt);
  if (j.contains("snapshot_stride") && !j.at("snapshot_stride").is_null())
    c.snapshot_stride = j.at("snapshot_stride").get<int>();
  c.min_snapshots = j.value("min_snapshots", c.min_snapshots);
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["P"] = c.P;
  j["M_list"] = c.M_list;
  j["Q"] = kernel_to_json(c.Q);
  j["K"] = kernel_to_json(c.K);
  j["T_star"] = c.T_star;
  j["amplitude"] = to_json(c.amplitude);
  j["d"] = c.d;
  j["seed"] = c.seed;
  j["slow_N"] = c.slow_N;
  j["grid_ceiling"] = c.grid_ceiling;
  j["N_list"] = c.N_list;
  j["dt"] = c.dt;
  j["snapshot_stride"] = c.snapshot_stride ? json(*c.snapshot_stride) : json(nullptr);
  j["min_snapshots"] = c.min_snapshots;
  j["threads"] = c.threads;
  return j;
}

std::string config_digest(const RunConfig& config) {
  // The thread count does not change any result, so it is left out.
  json j = to_json(config);
  j.erase("threads");
  const std::string text = j.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("config_digest: SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

// ---------------------------------------------------------------------------
// Slope fitting

SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size()) throw std::invalid_argument("fit_slope: size mismatch");
  const std::size_t n = eps.size();
  if (n < 3) throw std::invalid_argument("fit_slope: needs at least 3 points");
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0) || !(values[i] > 0.0)) throw std::invalid_argument("fit_slope: values must be positive");
    x[i] = std::log(eps[i]);
    y[i] = std::log(values[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: abscissae must not coincide");

  SlopeFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  const double se = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double t = boost::math::quantile(dist, 0.975);
  fit.slope_low = fit.slope - t * se;
  fit.slope_high = fit.slope + t * se;
  return fit;
}

// ---------------------------------------------------------------------------
// Scans

namespace {

/// Random real field with |kappa| <= 2, normalised to unit C^4 norm.
Spectrum perturbation(const TorusGrid& grid, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(grid.M()), static_cast<std::uint32_t>(grid.N())};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> g;
  Spectrum s(grid);
  for (int j = 0; j < grid.N(); ++j)
    if (std::abs(grid.kappa(j)) <= 2.0) s.coeffs[static_cast<std::size_t>(j)] = {g(rng), g(rng)};
  s = 0.5 * (s + conjugate(s));
  const double norm = c_norm(s, 4);
  return norm > 0.0 ? (1.0 / norm) * s : s;
}

struct LadderPoint {
  ScanRow row;
  double seconds = 0.0;
};

LadderPoint run_point(const RunConfig& c, std::size_t i, bool with_sh) {
  const auto start = Clock::now();
  LadderPoint out;
  ScanRow& row = out.row;
  const double eps = c.eps(i);
  row.eps = eps;
  row.M = c.M_list[i];
  row.N = c.fast_N(i);

  const TorusGrid fast(row.M, row.N);
  const TorusGrid slow = TorusGrid::slow(c.P, c.slow_N);
  const double gamma = gl_cubic_coefficient(c.Q, c.K);
  const Spectrum A = make_initial_amplitude(c.amplitude, slow, gamma);

  // Both solvers take the same number of steps, so snapshot k sits at
  // t_k on the fast clock and T_k = eps^2 t_k on the slow one.
  const double t_end = c.T_star / (eps * eps);
  const long steps = step_count(t_end, c.dt);
  const int stride = c.snapshot_stride ? *c.snapshot_stride
                                       : static_cast<int>(std::max<long>(1, steps / c.min_snapshots));
  row.dt = t_end / static_cast<double>(steps);

  const GLSystem gl_system{gamma, slow, A, eps * eps * t_end, eps * eps * t_end / static_cast<double>(steps)};
  GLTrajectory gl = simulate_gl(gl_system, stride);
  if (gl.blow_up) {
    row.complete = false;
    row.note = "GL blow-up at T = " + format_number(gl.blow_up->time);
  }
  const Ansatz ansatz(eps, fast, c.Q, c.K, gl);

  std::optional<SHTrajectory> sh;
  if (with_sh) {
    if (gl.blow_up) {
      row.snapshots = 0;
      out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
      return out;
    }
    Spectrum u0 = ansatz.psi(0);
    if (c.d > 0.0) u0 += (c.d * eps * eps) * perturbation(fast, c.seed);
    const SHProblem problem{fast, eps, c.Q, c.K, from_fourier(u0), t_end, row.dt};
    sh = simulate_sh(problem, stride);
    if (sh->blow_up) {
      row.complete = false;
      row.note = "SH blow-up at t = " + format_number(sh->blow_up->time);
    }
    row.u_minus_psi = row.u_minus_phi = row.error_ball = 0.0;
  }

  const std::size_t count = with_sh ? sh->times.size() : ansatz.size();
  row.snapshots = count;
  const double e4 = std::pow(eps, 4), e3 = std::pow(eps, 3);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t g = with_sh ? ansatz.snapshot_at(sh->times[k]) : k;
    const Spectrum psi = ansatz.psi(g);
    const PhiParts phi = ansatz.phi(g);
    const ResidualReport rep = residual_at(ansatz, g);
    SnapshotNorms snap;
    snap.t = ansatz.time(g);
    snap.phi_minus_psi = c_norm(phi.phi - psi, 4);
    snap.es_res = rep.es_norm.c1;
    snap.ec_res = rep.ec_norm.c1;
    row.delta_c = std::max(row.delta_c, rep.ec_norm.c1 / e4);
    row.delta_s = std::max(row.delta_s, rep.es_norm.c1 / e3);
    row.phi_s = std::max(row.phi_s, c_norm(phi.phi_s, 4));
    if (with_sh) {
      const Spectrum& u = sh->spectra[k];
      const ErrorComponents comp = error_components(u, phi.phi, eps);
      snap.u_minus_psi = c_norm(u - psi, 4);
      snap.u_minus_phi = comp.R_norms[4];
      snap.error_ball = comp.Rc_norms[4] + eps * comp.Rs_norms[4];
      row.u_minus_psi = std::max(row.u_minus_psi, snap.u_minus_psi);
      row.u_minus_phi = std::max(row.u_minus_phi, snap.u_minus_phi);
      row.error_ball = std::max(row.error_ball, snap.error_ball);
    }
    row.phi_minus_psi = std::max(row.phi_minus_psi, snap.phi_minus_psi);
    row.es_res = std::max(row.es_res, snap.es_res);
    row.ec_res = std::max(row.ec_res, snap.ec_res);
    row.series.push_back(snap);
  }
  out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

ScanResult run_scan(const RunConfig& config, bool with_sh) {
  config.validate();
  const std::size_t n = config.M_list.size();
  std::vector<LadderPoint> points(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        points[i] = run_point(config, i, with_sh);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), n);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ScanResult result;
  result.kind = with_sh ? "validity" : "residual";
  for (auto& p : points) {
    result.rows.push_back(p.row);
    result.seconds.push_back(p.seconds);
    if (!p.row.complete) result.partial = true;
  }

  std::vector<double> eps;
  for (const auto& r : result.rows) eps.push_back(r.eps);
  auto column = [&](double ScanRow::*field) {
    std::vector<double> v;
    for (const auto& r : result.rows) v.push_back(r.*field);
    return v;
  };
  auto fit = [&](const std::string& name, double ScanRow::*field) {
    const auto v = column(field);
    if (result.partial || v.size() < 3) return;
    if (!std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; })) return;
    result.slopes[name] = fit_slope(eps, v);
  };
  auto stable = [&](const std::string& name, std::vector<double> v) {
    if (result.partial || v.size() < 2) return;
    if (!std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; })) return;
    result.spreads[name] = spread(v);
  };

  fit("phi_minus_psi", &ScanRow::phi_minus_psi);
  fit("es_res", &ScanRow::es_res);
  fit("ec_res", &ScanRow::ec_res);
  stable("delta_c", column(&ScanRow::delta_c));
  stable("delta_s", column(&ScanRow::delta_s));
  stable("phi_s", column(&ScanRow::phi_s));
  if (with_sh) {
    fit("u_minus_psi", &ScanRow::u_minus_psi);
    fit("u_minus_phi", &ScanRow::u_minus_phi);
    auto scaled = column(&ScanRow::u_minus_psi);
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] /= eps[i] * eps[i];
    stable("u_minus_psi_over_eps2", scaled);
    stable("error_ball", column(&ScanRow::error_ball));
  }
  return result;
}

}  // namespace

ScanResult run_validity_scan(const RunConfig& config) { return run_scan(config, true); }
ScanResult run_residual_scan(const RunConfig& config) { return run_scan(config, false); }

// ---------------------------------------------------------------------------
// Property suites

bool PropertyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed(); });
}

const PropertyCheck& PropertyReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no property check named '" + name + "'");
}

namespace {

template <class Keep>
Spectrum random_field(const TorusGrid& grid, std::mt19937_64& rng, Keep keep, bool real) {
  std::normal_distribution<double> g;
  Spectrum s(grid);
  for (int j = 0; j < grid.N(); ++j)
    if (keep(grid.kappa(j))) s.coeffs[static_cast<std::size_t>(j)] = {g(rng), g(rng)};
  return real ? 0.5 * (s + conjugate(s)) : s;
}

double energy_beyond(const Spectrum& s, double radius) {
  double e = 0.0;
  for (int j = 0; j < s.grid.N(); ++j)
    if (std::abs(s.grid.kappa(j)) > radius) e += std::norm(s.coeffs[static_cast<std::size_t>(j)]);
  return e;
}

/// Slope of log(values) against t by least squares.
double log_linear_rate(const std::vector<double>& t, const std::vector<double>& values) {
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    mx += t[i] / n;
    my += std::log(values[i]) / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxx += (t[i] - mx) * (t[i] - mx);
    sxy += (t[i] - mx) * (std::log(values[i]) - my);
  }
  return sxy / sxx;
}

constexpr int kInstances = 100;

void cancellation_checks(PropertyReport& report, std::mt19937_64& rng) {
  const TorusGrid g(32, 512);
  const auto Ec = make_cutoff(CutoffName::chi_c, g);
  const auto Q = KernelMeasure::from_half_line({{0.7, 0.3}}, Laplace{0.8, 1.5});
  auto all = [](double) { return true; };
  auto critical = [](double k) { return std::abs(std::abs(k) - 1.0) <= 0.25; };
  auto slow = [](double k) { return std::abs(k) <= 0.25; };
  std::uniform_int_distribution<int> order(0, 2), shift(-2, 2);
  const double eta = 1.0 / g.M();

  double local = 0.0, nonlocal = 0.0, quad = 0.0, cubic = 0.0, continuity = 0.0;
  for (int trial = 0; trial < kInstances; ++trial) {
    const auto u1 = apply_filter(random_field(g, rng, all, true), Ec);
    const auto u2 = apply_filter(random_field(g, rng, all, true), Ec);
    const auto p = dealiased_product(derivative(u1, order(rng)), derivative(u2, order(rng)));
    local = std::max(local, energy(apply_filter(p, Ec)) / energy(p));

    const int n = shift(rng);
    const auto b1 = random_field(g, rng, critical, true);
    const auto b2 = random_field(g, rng, critical, true);
    const auto q = dealiased_product(b1, modulated_kernel_convolve(b2, Q, n));
    nonlocal = std::max(nonlocal, energy(apply_filter(q, Ec)) / energy(q));

    const auto s1 = random_field(g, rng, slow, false);
    const auto s2 = random_field(g, rng, slow, false);
    const auto s3 = random_field(g, rng, slow, false);
    const auto q2 = dealiased_product(s1, modulated_kernel_convolve(s2, Q, n));
    const auto q3 = dealiased_product(s1, modulated_kernel_convolve(dealiased_product(s2, s3), Q, n));
    quad = std::max(quad, energy_beyond(q2, 0.5 + eta) / energy(q2));
    cubic = std::max(cubic, energy_beyond(q3, 0.75 + eta) / energy(q3));

    const auto f1 = from_fourier(b1);
    const auto f2 = from_fourier(modulated_kernel_convolve(b2, Q, n));
    SpectralField prod(g);
    for (std::size_t j = 0; j < prod.samples.size(); ++j) prod.samples[j] = f1.samples[j] * f2.samples[j];
    continuity = std::max(continuity, sup_norm(prod) / (total_variation(Q) * c_norm(b1, 0) * c_norm(b2, 0)));
  }
  const std::string inst = std::to_string(kInstances) + " random instances";
  report.checks.push_back({"filter_cancellation", local, -INFINITY, 1e-12,
                           "relative energy of E_c(d^r1 E_c u1 * d^r2 E_c u2); " + inst});
  report.checks.push_back({"nonlocal_cancellation", nonlocal, -INFINITY, 1e-12,
                           "relative energy of E_c(B1 (Q e^{in.}) * B2), B near +-1; " + inst});
  report.checks.push_back({"support_quadratic", quad, -INFINITY, 1e-12,
                           "relative energy beyond |kappa| = 1/2 + 1/M; " + inst});
  report.checks.push_back({"support_cubic", cubic, -INFINITY, 1e-12,
                           "relative energy beyond |kappa| = 3/4 + 1/M; " + inst});
  report.checks.push_back({"convolution_continuity", continuity, -INFINITY, 1.0 + 1e-9,
                           "sup |B1 (Q e^{in.}) * B2| / (|Q| |B1| |B2|); " + inst});
}

void convolution_checks(PropertyReport& report, const RunConfig& config) {
  const TorusGrid slow = TorusGrid::slow(config.P, 32);
  const double P = config.P;
  auto make = [&](auto f) { return to_fourier(SpectralField::from_function(slow, f)); };
  const auto B1 = make([P](double X) { return cplx(1.0 + 0.3 * std::cos(X / P)); });
  const auto B2 = make([P](double X) { return cplx(0.5 * std::sin(2 * X / P), 0.2 * std::cos(X / P)); });
  const auto B3 = make([P](double X) { return cplx(0.7 + 0.1 * std::sin(3 * X / P)); });

  const auto dirac = convolution_approx_gap(B1, B2, B3, KernelMeasure::dirac(), 1, config.eps(0));
  report.checks.push_back({"convolution_gap_dirac", std::max(dirac.quad_gap, dirac.cubic_gap), -INFINITY, 1e-11,
                           "C^1 gaps for the Dirac kernel"});

  std::vector<double> eps, quad, cubic;
  for (std::size_t i = 0; i < config.M_list.size(); ++i) {
    const auto gap = convolution_approx_gap(B1, B2, B3, KernelMeasure::gaussian(1.0, 1.0), 1, config.eps(i));
    eps.push_back(config.eps(i));
    quad.push_back(gap.quad_gap);
    cubic.push_back(gap.cubic_gap);
  }
  report.checks.push_back({"convolution_gap_quadratic_slope", fit_slope(eps, quad).slope, 0.8, 1.3,
                           "gaussian(1,1), n = 1, eps ladder from M_list"});
  report.checks.push_back({"convolution_gap_cubic_slope", fit_slope(eps, cubic).slope, 0.8, 1.3,
                           "gaussian(1,1), n = 1, eps ladder from M_list"});
}

void scaling_checks(PropertyReport& report, const RunConfig& config, std::mt19937_64& rng) {
  // Coefficients decaying like |m|^-4 give a C^2 function that is not band-limited.
  const TorusGrid slow = TorusGrid::slow(config.P, 256);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Spectrum A(slow);
  for (int j = 0; j < slow.N(); ++j) {
    const int m = slow.mode(j);
    if (std::abs(m) == slow.N() / 2) continue;
    A.coeffs[static_cast<std::size_t>(j)] = std::polar(std::pow(1.0 + std::abs(m), -4.0), phase(rng));
  }
  for (int n : {1, 2}) {
    std::vector<double> eps, norms;
    for (std::size_t i = 0; i < config.M_list.size(); ++i) {
      const TorusGrid fast = default_fast_grid(config.M_list[i], TorusGrid::kMinCeiling);
      const auto high = apply_filter(lift(A, fast), make_cutoff(CutoffName::chi_0c, fast));
      eps.push_back(config.eps(i));
      norms.push_back(c_norm(high, n));
    }
    report.checks.push_back({"scaling_filter_slope_n" + std::to_string(n), fit_slope(eps, norms).slope, n - 0.2,
                             INFINITY, "C^n norm of (1 - E_0) A(eps x), algebraic spectral decay"});
  }
}

void semigroup_checks(PropertyReport& report, std::mt19937_64& rng) {
  const double eps = 0.05;
  const TorusGrid g(80, 1024);
  const auto sh = make_cutoff(CutoffName::chi_s_h, g);
  const auto ch = make_cutoff(CutoffName::chi_c_h, g);
  double sigma = INFINITY;
  for (int j = 0; j < g.N(); ++j)
    if (sh.values[static_cast<std::size_t>(j)] > 0.0) sigma = std::min(sigma, -linear_symbol(g.kappa(j), eps));

  auto band = [](double k) { return std::abs(k) < 3.0; };
  const auto vs = apply_filter(random_field(g, rng, band, true), sh);
  const auto vc = apply_filter(random_field(g, rng, band, true), ch);
  const double vc0 = sup_norm(from_fourier(vc));
  std::vector<double> times, decay;
  double growth = 0.0;
  for (int step = 0; step <= 200; ++step) {
    const double t = step;
    if (t >= 1.0) {
      times.push_back(t);
      decay.push_back(sup_norm(from_fourier(apply_semigroup(vs, t, eps, sh))));
    }
    growth = std::max(growth, sup_norm(from_fourier(apply_semigroup(vc, t, eps, ch))) / (std::exp(eps * eps * t) * vc0));
  }
  const double rate = -log_linear_rate(times, decay);
  report.checks.push_back({"semigroup_stable_rate", rate / sigma, 0.9, INFINITY,
                           "fitted decay rate over t in [1, 200] divided by sigma_grid = " + format_number(sigma)});
  report.checks.push_back({"semigroup_critical_growth", growth, -INFINITY, 1.05,
                           "max_t |e^{Lt} E_c^h v| / (e^{eps^2 t} |E_c^h v|), t in [0, 200]"});
}

}  // namespace

PropertyReport run_lemma_suite(const RunConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  PropertyReport report;
  cancellation_checks(report, rng);
  convolution_checks(report, config);
  scaling_checks(report, config, rng);
  semigroup_checks(report, rng);
  return report;
}

PropertyReport run_integrator_suite() {
  PropertyReport report;
  auto self_convergence = [](const std::vector<double>& dts, auto run) {
    const auto ref = run(dts.back() / 16);
    std::vector<double> errs;
    for (double dt : dts) {
      const auto s = run(dt);
      double e = 0.0;
      for (std::size_t j = 0; j < s.coeffs.size(); ++j) e = std::max(e, std::abs(s.coeffs[j] - ref.coeffs[j]));
      errs.push_back(e);
    }
    return fit_slope(dts, errs).slope;
  };

  const TorusGrid g(1, 32);
  const auto u0 = SpectralField::from_function(
      g, [](double x) { return cplx(0.4 * std::cos(x) + 0.2 * std::sin(2 * x) + 0.1); });
  const double sh_slope = self_convergence({0.2, 0.1, 0.05, 0.025}, [&](double dt) {
    const SHProblem p{g, 0.3, KernelMeasure::gaussian(0.5, 0.7), KernelMeasure::dirac(), u0, 2.0, dt};
    return simulate_sh(p, 1000000).spectra.back();
  });
  report.checks.push_back({"sh_time_order", sh_slope, 3.7, 4.3, "self-convergence, dt = 0.2 .. 0.025"});

  const TorusGrid gx = TorusGrid::slow(2, 32);
  Spectrum A(gx);
  A.coeffs[0] = {0.4, 0.1};
  A.coeffs[1] = {0.2, -0.3};
  A.coeffs[static_cast<std::size_t>(gx.slot(-1))] = {-0.1, 0.25};
  const double gl_slope = self_convergence({0.0125, 0.00625, 0.003125, 0.0015625}, [&](double dT) {
    return simulate_gl({3.0, gx, A, 1.0, dT}, 1000000).A.back();
  });
  report.checks.push_back({"gl_time_order", gl_slope, 3.7, 4.3, "self-convergence, dT = 0.0125 .. 0.0015625"});

  const TorusGrid gl(4, 64);
  const double eps = 0.1;
  std::mt19937_64 rng(31);
  const auto r = random_field(gl, rng, [](double k) { return std::abs(k) < 3; }, true);
  const SHProblem lin{gl, eps, KernelMeasure::zero(), KernelMeasure::zero(), from_fourier(r), 10.0, 0.1};
  const auto out = simulate_sh(lin, 1000).spectra.back();
  const auto closed = apply_multiplier(r, [&](double k) { return cplx(std::exp(linear_symbol(k, eps) * 10.0)); });
  double diff = 0.0;
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) diff = std::max(diff, std::abs(out.coeffs[j] - closed.coeffs[j]));
  report.checks.push_back({"sh_linear_exact", diff, -INFINITY, 1e-11, "zero kernels, t = 10, max coefficient error"});
  return report;
}

json to_json(const PropertyReport& report) {
  json j = json::array();
  for (const auto& c : report.checks) {
    j.push_back({{"name", c.name},
                 {"measured", c.measured},
                 {"lower", std::isfinite(c.lower) ? json(c.lower) : json(nullptr)},
                 {"upper", std::isfinite(c.upper) ? json(c.upper) : json(nullptr)},
                 {"passed", c.passed()},
                 {"detail", c.detail}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Output

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_scan_csv(std::ostream& out, const ScanResult& result) {
  out << "eps,M,N,dt,snapshots,u_minus_psi_C4,u_minus_phi_C4,phi_minus_psi_C4,Es_res_C1,Ec_res_C1,"
         "delta_c_C1,delta_s_C1,phi_s_C4,Rc_plus_eps_Rs_C4,complete\n";
  for (const auto& r : result.rows) {
    out << format_number(r.eps) << ',' << r.M << ',' << r.N << ',' << format_number(r.dt) << ',' << r.snapshots
        << ',' << format_number(r.u_minus_psi) << ',' << format_number(r.u_minus_phi) << ','
        << format_number(r.phi_minus_psi) << ',' << format_number(r.es_res) << ',' << format_number(r.ec_res) << ','
        << format_number(r.delta_c) << ',' << format_number(r.delta_s) << ',' << format_number(r.phi_s) << ','
        << format_number(r.error_ball) << ',' << (r.complete ? 1 : 0) << '\n';
  }
}

void write_series_csv(std::ostream& out, const ScanResult& result) {
  out << "eps,t,u_minus_psi_C4,u_minus_phi_C4,phi_minus_psi_C4,Es_res_C1,Ec_res_C1,Rc_plus_eps_Rs_C4\n";
  for (const auto& r : result.rows) {
    for (const auto& s : r.series) {
      out << format_number(r.eps) << ',' << format_number(s.t) << ',' << format_number(s.u_minus_psi) << ','
          << format_number(s.u_minus_phi) << ',' << format_number(s.phi_minus_psi) << ','
          << format_number(s.es_res) << ',' << format_number(s.ec_res) << ',' << format_number(s.error_ball)
          << '\n';
    }
  }
}

json slopes_json(const ScanResult& result) {
  json j;
  j["kind"] = result.kind;
  j["partial"] = result.partial;
  j["slopes"] = json::object();
  for (const auto& [name, f] : result.slopes) {
    j["slopes"][name] = {{"slope", f.slope},
                         {"intercept", f.intercept},
                         {"residual", f.residual},
                         {"ci95", {f.slope_low, f.slope_high}},
                         {"points", f.points}};
  }
  j["spreads"] = result.spreads;
  j["notes"] = json::array();
  for (const auto& r : result.rows)
    if (!r.note.empty()) j["notes"].push_back({{"eps", r.eps}, {"note", r.note}});
  return j;
}

json manifest_json(const RunConfig& config, const ScanResult& result) {
  json j;
  j["config"] = to_json(config);
  j["config_digest"] = config_digest(config);
  j["kind"] = result.kind;
  j["versions"] = {{"nlsh", "0.1.0"}, {"fftw", std::string(fftw_version)}, {"compiler", std::string(__VERSION__)}};
  json rows = json::array();
  double total = 0.0;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const double s = i < result.seconds.size() ? result.seconds[i] : 0.0;
    rows.push_back({{"eps", result.rows[i].eps}, {"M", result.rows[i].M}, {"seconds", s}});
    total += s;
  }
  j["timings"] = {{"rows", rows}, {"total_seconds", total}};
  j["outputs"] = {"scan.csv", "series.csv", "slopes.json", "manifest.json"};
  return j;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_scan_outputs(const std::filesystem::path& dir, const RunConfig& config, const ScanResult& result) {
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  write_scan_csv(csv, result);
  write_file_atomically(dir / "scan.csv", csv.str());
  std::ostringstream series;
  write_series_csv(series, result);
  write_file_atomically(dir / "series.csv", series.str());
  write_file_atomically(dir / "slopes.json", slopes_json(result).dump(2) + "\n");
  write_file_atomically(dir / "manifest.json", manifest_json(config, result).dump(2) + "\n");
}

}  // namespace nlsh
