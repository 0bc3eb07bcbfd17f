#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nlsh/glsolver.hpp"
#include "nlsh/kernel.hpp"

namespace nlsh {

/// Everything an epsilon-ladder experiment needs. Each run uses eps = P / M,
/// so the fast domain 2 pi M and the slow domain 2 pi P match exactly.
struct RunConfig {
  int P = 10;
  std::vector<int> M_list{100, 200, 400};
  KernelMeasure Q = KernelMeasure::zero();
  KernelMeasure K = KernelMeasure::dirac();
  double T_star = 1.0;
  AmplitudePreset amplitude;
  double d = 0.0;  // initial perturbation scale, |u0 - psi(0)|_{C^4} = d eps^2
  std::uint64_t seed = 1;

  int slow_N = 64;
  double grid_ceiling = 8.0;      // fast N is the smallest power of two with N / 2M >= ceiling
  std::vector<int> N_list;        // optional per-M override of the fast N
  double dt = 0.1;                // fast-time step; GL uses eps^2 dt
  std::optional<int> snapshot_stride;
  int min_snapshots = 100;
  int threads = 1;

  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;
  double eps(std::size_t i) const { return static_cast<double>(P) / M_list.at(i); }
  int fast_N(std::size_t i) const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
/// SHA-256 of the canonical JSON form, hex encoded.
std::string config_digest(const RunConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the log-log fit residuals
  double slope_low = 0.0;   // 95% confidence interval (Student t)
  double slope_high = 0.0;
  std::size_t points = 0;
};

/// Least squares on (log eps, log value). Needs >= 3 points and positive values.
SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& values);

/// Norms at one snapshot; NaN where the scan has no SH solution.
struct SnapshotNorms {
  double t = 0.0;
  double u_minus_psi = std::numeric_limits<double>::quiet_NaN();
  double u_minus_phi = std::numeric_limits<double>::quiet_NaN();
  double phi_minus_psi = 0.0;
  double es_res = 0.0;
  double ec_res = 0.0;
  double error_ball = std::numeric_limits<double>::quiet_NaN();
};

/// One epsilon of a ladder. Norms are suprema over the recorded snapshots;
/// quantities a scan does not measure are NaN.
struct ScanRow {
  double eps = 0.0;
  int M = 0;
  int N = 0;
  double dt = 0.0;
  std::size_t snapshots = 0;
  double u_minus_psi = std::numeric_limits<double>::quiet_NaN();  // C^4
  double u_minus_phi = std::numeric_limits<double>::quiet_NaN();  // C^4
  double phi_minus_psi = 0.0;                                     // C^4
  double es_res = 0.0;                                            // C^1
  double ec_res = 0.0;                                            // C^1
  double delta_c = 0.0;                                           // C^1
  double delta_s = 0.0;                                           // C^1
  double phi_s = 0.0;                                             // C^4
  double error_ball = std::numeric_limits<double>::quiet_NaN();   // |R_c|_{C^4} + eps |R_s|_{C^4}
  bool complete = true;
  std::string note;
  std::vector<SnapshotNorms> series;
};

struct ScanResult {
  std::string kind;
  std::vector<ScanRow> rows;  // eps descending
  std::map<std::string, SlopeFit> slopes;
  /// max / min across the ladder of ladder-stable quantities.
  std::map<std::string, double> spreads;
  std::vector<double> seconds;  // wall clock per row; not part of the deterministic outputs
  bool partial = false;
};

/// Simulates GL and SH for every eps and measures the approximation errors.
ScanResult run_validity_scan(const RunConfig& config);
/// Same ladder without the SH runs: residual, refinement and forcing norms only.
ScanResult run_residual_scan(const RunConfig& config);

/// A measured value and the closed interval it has to fall in.
struct PropertyCheck {
  std::string name;
  double measured = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  std::string detail;
  bool passed() const { return measured >= lower && measured <= upper; }
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  bool all_passed() const;
  const PropertyCheck& at(const std::string& name) const;
};

/// Randomized checks of the filter, cancellation, support, convolution,
/// scaling and semigroup properties, seeded from config.seed.
PropertyReport run_lemma_suite(const RunConfig& config);
/// Self-convergence of both ETDRK4 solvers and exact linear SH propagation.
PropertyReport run_integrator_suite();

nlohmann::json to_json(const PropertyReport& report);

void write_scan_csv(std::ostream& out, const ScanResult& result);
/// One line per (eps, snapshot).
void write_series_csv(std::ostream& out, const ScanResult& result);
nlohmann::json slopes_json(const ScanResult& result);
nlohmann::json manifest_json(const RunConfig& config, const ScanResult& result);
/// Writes scan.csv, series.csv, slopes.json and manifest.json into dir, each via a
/// temporary file and a rename.
void write_scan_outputs(const std::filesystem::path& dir, const RunConfig& config, const ScanResult& result);
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

/// "%.17g" formatting; NaN is written as "nan".
std::string format_number(double v);

}  // namespace nlsh
