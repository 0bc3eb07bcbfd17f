#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlsh/spectral.hpp"

namespace nlsh {

/// Raised when a step produces NaN or a sup-norm above the blow-up threshold.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(long step, double time, const std::string& what)
      : std::runtime_error(what), step_(step), time_(time) {}
  long step() const { return step_; }
  double time() const { return time_; }

 private:
  long step_;
  double time_;
};

inline constexpr double kBlowUpThreshold = 1e6;

/// Exponential time differencing RK4 (Cox-Matthews) for u' = L u + N(u) with
/// L diagonal in Fourier space. The phi-function weights are evaluated by
/// contour averaging when |L dt| is small.
class Etdrk4 {
 public:
  using Nonlinearity = std::function<Spectrum(const Spectrum&)>;

  static constexpr int kContourPoints = 32;
  static constexpr double kContourThreshold = 0.5;

  Etdrk4(const TorusGrid& grid, const std::function<double(double)>& symbol, double dt);

  double dt() const { return dt_; }
  const TorusGrid& grid() const { return grid_; }

  /// One step; no blow-up check.
  Spectrum step(const Spectrum& u, const Nonlinearity& nonlinearity) const;

  /// The weights for a single value z = lambda dt, exposed for testing.
  struct Weights {
    double e, e2, q, f1, f2, f3;
  };
  static Weights weights(double z, double dt);

 private:
  TorusGrid grid_;
  double dt_;
  std::vector<Weights> w_;
};

/// Convenience form matching a single-step call site; builds the weights each time.
Spectrum etdrk4_step(const Spectrum& u, double dt, const std::function<double(double)>& symbol,
                     const Etdrk4::Nonlinearity& nonlinearity);

/// Throws BlowUpError if u contains NaN or exceeds the threshold in sup-norm.
void check_finite(const Spectrum& u, long step, double time, double threshold = kBlowUpThreshold);

}  // namespace nlsh
