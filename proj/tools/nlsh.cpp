// Command-line front end for the amplitude-equation laboratory.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nlsh/approx.hpp"
#include "nlsh/glsolver.hpp"
#include "nlsh/harness.hpp"
#include "nlsh/kernel.hpp"
#include "nlsh/shsolver.hpp"
#include "nlsh/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nlsh;

namespace {

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

json load_json(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return json::parse(in, nullptr, true, true);
}

RunConfig load_run_config(const GlobalOptions& g) {
  json j = load_json(g.config);
  if (g.seed) j["seed"] = *g.seed;
  if (g.threads) j["threads"] = *g.threads;
  return run_config_from_json(j);
}

fs::path out_dir(const GlobalOptions& g, const char* fallback) {
  const fs::path dir = g.out.empty() ? fs::path(fallback) : fs::path(g.out);
  fs::create_directories(dir);
  return dir;
}

std::string snapshot_name(const char* prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu", prefix, k);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_coeffs(const GlobalOptions& g) {
  const json j = load_json(g.config);
  const KernelMeasure Q = j.contains("Q") ? kernel_from_json(j.at("Q")) : RunConfig{}.Q;
  const KernelMeasure K = j.contains("K") ? kernel_from_json(j.at("K")) : RunConfig{}.K;
  const auto q = coefficient_table(Q, 3), k = coefficient_table(K, 3);
  json out;
  for (int n = 0; n <= 3; ++n) {
    out["q" + std::to_string(n)] = q.at(n);
    out["k" + std::to_string(n)] = k.at(n);
  }
  out["gamma"] = gl_cubic_coefficient(Q, K);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_filters_export(const GlobalOptions& g, int M, int N) {
  const TorusGrid grid = N > 0 ? TorusGrid(M, N) : default_fast_grid(M);
  const CutoffName names[] = {CutoffName::chi_c, CutoffName::chi_0, CutoffName::chi_s, CutoffName::chi_c_h,
                              CutoffName::chi_s_h};
  std::vector<CutoffProfile> profiles;
  for (auto n : names) profiles.push_back(make_cutoff(n, grid));

  std::ostringstream csv;
  csv << "kappa,chi_c,chi_0,chi_s,chi_c_h,chi_s_h\n";
  for (int m = -grid.N() / 2; m < grid.N() / 2; ++m) {
    const auto j = static_cast<std::size_t>(grid.slot(m));
    csv << format_number(static_cast<double>(m) / M);
    for (const auto& p : profiles) csv << ',' << format_number(p.values[j]);
    csv << '\n';
  }
  if (g.out.empty()) {
    std::cout << csv.str();
  } else {
    const auto dir = out_dir(g, "");
    write_file_atomically(dir / "filters.csv", csv.str());
  }
  return 0;
}

/// Config: {"grid": {"M", "N"}, "eps", "dt", "t_end", "snapshot_stride", "Q", "K",
///          "initial": {"amplitude", "slow_N", "d"}, "format": "csv" | "binary"}.
int cmd_simulate_sh(const GlobalOptions& g) {
  const json j = load_json(g.config);
  const json grid_j = j.value("grid", json::object());
  const int M = grid_j.value("M", 100);
  const int N = grid_j.value("N", 0);
  const TorusGrid grid = N > 0 ? TorusGrid(M, N) : default_fast_grid(M);
  const double eps = j.value("eps", 0.1);
  const double dt = j.value("dt", 0.1);
  const double t_end = j.value("t_end", 1.0 / (eps * eps));
  const int stride = j.value("snapshot_stride", 100);
  const KernelMeasure Q = j.contains("Q") ? kernel_from_json(j.at("Q")) : RunConfig{}.Q;
  const KernelMeasure K = j.contains("K") ? kernel_from_json(j.at("K")) : RunConfig{}.K;
  const std::string format = j.value("format", "csv");
  if (format != "csv" && format != "binary") throw std::invalid_argument("format must be csv or binary");

  const json init = j.value("initial", json::object());
  const double P_real = eps * M;
  const int P = static_cast<int>(std::lround(P_real));
  if (P < 1 || std::abs(P_real - P) > 1e-9 * P_real)
    throw std::invalid_argument("simulate-sh: eps * M must be a positive integer");
  const TorusGrid slow = TorusGrid::slow(P, init.value("slow_N", 64));
  const AmplitudePreset preset = init.contains("amplitude") ? amplitude_preset_from_json(init.at("amplitude"))
                                                            : AmplitudePreset{};
  const Spectrum A = make_initial_amplitude(preset, slow, gl_cubic_coefficient(Q, K));
  Spectrum u0 = psi_spectrum(A, eps, grid);
  const double d = init.value("d", 0.0);
  if (d > 0.0) {
    std::mt19937_64 rng(g.seed.value_or(init.value("seed", std::uint64_t{1})));
    std::normal_distribution<double> z;
    Spectrum p(grid);
    for (int i = 0; i < grid.N(); ++i)
      if (std::abs(grid.kappa(i)) <= 2.0) p.coeffs[static_cast<std::size_t>(i)] = {z(rng), z(rng)};
    p = 0.5 * (p + conjugate(p));
    u0 += (d * eps * eps / c_norm(p, 4)) * p;
  }

  const SHTrajectory traj = simulate_sh({grid, eps, Q, K, from_fourier(u0), t_end, dt}, stride);
  const auto dir = out_dir(g, "sh_out");
  std::ostringstream table;
  table << "t,sup,C4\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    table << format_number(traj.times[k]) << ',' << format_number(traj.sup_norms[k]) << ','
          << format_number(traj.c4_norms[k]) << '\n';
  write_file_atomically(dir / "trajectory.csv", table.str());

  json manifest{{"kind", "simulate-sh"}, {"config", j},   {"M", M},         {"N", grid.N()},
                {"eps", eps},            {"dt", traj.dt}, {"format", format}, {"snapshots", traj.times.size()}};
  if (traj.blow_up) manifest["blow_up"] = {{"step", traj.blow_up->step}, {"time", traj.blow_up->time},
                                           {"message", traj.blow_up->message}};
  if (format == "csv") {
    fs::create_directories(dir / "snapshots");
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const auto f = traj.field(k);
      std::ostringstream s;
      s << "x,u\n";
      for (int i = 0; i < grid.N(); ++i)
        s << format_number(grid.x(i)) << ',' << format_number(f.samples[static_cast<std::size_t>(i)].real()) << '\n';
      write_file_atomically(dir / "snapshots" / (snapshot_name("u", k) + ".csv"), s.str());
    }
  } else {
    std::string bytes;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const auto f = traj.field(k);
      for (const auto& v : f.samples) {
        const double r = v.real();
        bytes.append(reinterpret_cast<const char*>(&r), sizeof r);
      }
    }
    write_file_atomically(dir / "snapshots.bin", bytes);
    manifest["binary"] = {{"file", "snapshots.bin"}, {"dtype", "float64"}, {"endianness", "native"},
                          {"shape", {traj.times.size(), grid.N()}}, {"times", traj.times}};
  }
  write_file_atomically(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "simulate-sh: " << traj.times.size() << " snapshots to " << dir.string()
            << (traj.blow_up ? " (blow-up)" : "") << "\n";
  return traj.blow_up ? 2 : 0;
}

/// Config: {"P", "slow_N", "Q", "K", "amplitude", "T_end", "dT", "snapshot_stride"}.
int cmd_simulate_gl(const GlobalOptions& g) {
  const json j = load_json(g.config);
  const int P = j.value("P", 10);
  const TorusGrid slow = TorusGrid::slow(P, j.value("slow_N", 64));
  const KernelMeasure Q = j.contains("Q") ? kernel_from_json(j.at("Q")) : RunConfig{}.Q;
  const KernelMeasure K = j.contains("K") ? kernel_from_json(j.at("K")) : RunConfig{}.K;
  const double gamma = gl_cubic_coefficient(Q, K);
  const AmplitudePreset preset =
      j.contains("amplitude") ? amplitude_preset_from_json(j.at("amplitude")) : AmplitudePreset{};
  const Spectrum A = make_initial_amplitude(preset, slow, gamma);
  const GLTrajectory traj =
      simulate_gl({gamma, slow, A, j.value("T_end", 1.0), j.value("dT", 1e-3)}, j.value("snapshot_stride", 10));

  const auto dir = out_dir(g, "gl_out");
  fs::create_directories(dir / "snapshots");
  std::ostringstream table;
  table << "T,sup_abs_A\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto f = from_fourier(traj.A[k]);
    table << format_number(traj.times[k]) << ',' << format_number(sup_norm(f)) << '\n';
    std::ostringstream s;
    s << "X,re,im\n";
    for (int i = 0; i < slow.N(); ++i) {
      const auto v = f.samples[static_cast<std::size_t>(i)];
      s << format_number(slow.x(i)) << ',' << format_number(v.real()) << ',' << format_number(v.imag()) << '\n';
    }
    write_file_atomically(dir / "snapshots" / (snapshot_name("A", k) + ".csv"), s.str());
  }
  write_file_atomically(dir / "trajectory.csv", table.str());
  json manifest{{"kind", "simulate-gl"}, {"config", j}, {"gamma", gamma}, {"dT", traj.dT},
                {"snapshots", traj.times.size()}};
  if (traj.blow_up) manifest["blow_up"] = {{"time", traj.blow_up->time}, {"message", traj.blow_up->message}};
  write_file_atomically(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "simulate-gl: gamma = " << format_number(gamma) << ", " << traj.times.size() << " snapshots to "
            << dir.string() << (traj.blow_up ? " (blow-up)" : "") << "\n";
  return traj.blow_up ? 2 : 0;
}

void print_scan(const ScanResult& r) {
  for (const auto& [name, f] : r.slopes)
    std::cout << "slope " << name << " = " << format_number(f.slope) << "  [" << format_number(f.slope_low) << ", "
              << format_number(f.slope_high) << "]\n";
  for (const auto& [name, s] : r.spreads) std::cout << "spread " << name << " = " << format_number(s) << "\n";
  if (r.partial) std::cout << "partial result: at least one run did not complete\n";
}

int cmd_scan(const GlobalOptions& g, bool validity) {
  const RunConfig config = load_run_config(g);
  const ScanResult r = validity ? run_validity_scan(config) : run_residual_scan(config);
  const auto dir = out_dir(g, validity ? "validate_out" : "residual_out");
  write_scan_outputs(dir, config, r);
  print_scan(r);
  std::cout << "wrote " << dir.string() << "\n";
  return r.partial ? 2 : 0;
}

int cmd_lemmas(const GlobalOptions& g) {
  const RunConfig config = load_run_config(g);
  const PropertyReport lemmas = run_lemma_suite(config);
  const PropertyReport integrators = run_integrator_suite();
  for (const auto* report : {&lemmas, &integrators}) {
    for (const auto& c : report->checks)
      std::cout << (c.passed() ? "PASS " : "FAIL ") << c.name << " = " << format_number(c.measured) << "\n";
  }
  if (!g.out.empty()) {
    const json j{{"lemmas", to_json(lemmas)}, {"integrators", to_json(integrators)},
                 {"config_digest", config_digest(config)}};
    write_file_atomically(out_dir(g, "") / "lemmas.json", j.dump(2) + "\n");
  }
  return lemmas.all_passed() && integrators.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal Swift-Hohenberg / Ginzburg-Landau amplitude-equation laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--out", g.out, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads for ladder runs")->check(CLI::PositiveNumber);

  auto* coeffs = app.add_subcommand("coeffs", "Print q_n, k_n (n = 0..3) and gamma as JSON");
  auto* filters = app.add_subcommand("filters", "Mode filter profiles");
  filters->require_subcommand(1);
  auto* fexport = filters->add_subcommand("export", "Write profile samples as CSV");
  int filter_M = 100, filter_N = 0;
  fexport->add_option("--M", filter_M, "Fast domain factor (length 2 pi M)")->check(CLI::PositiveNumber);
  fexport->add_option("--N", filter_N, "Grid points (default: power of two with N / 2M >= 8)");
  auto* sim_sh = app.add_subcommand("simulate-sh", "Integrate the Swift-Hohenberg equation");
  auto* sim_gl = app.add_subcommand("simulate-gl", "Integrate the Ginzburg-Landau equation");
  auto* residual = app.add_subcommand("residual", "Residual-order scan over the eps ladder");
  auto* validate = app.add_subcommand("validate", "Approximation-validity scan over the eps ladder");
  auto* lemmas = app.add_subcommand("lemmas", "Randomized property suite");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;
  if (*threads_opt) g.threads = threads;

  try {
    if (*coeffs) return cmd_coeffs(g);
    if (*fexport) return cmd_filters_export(g, filter_M, filter_N);
    if (*sim_sh) return cmd_simulate_sh(g);
    if (*sim_gl) return cmd_simulate_gl(g);
    if (*residual) return cmd_scan(g, false);
    if (*validate) return cmd_scan(g, true);
    if (*lemmas) return cmd_lemmas(g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
