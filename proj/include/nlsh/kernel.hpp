#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace nlsh {

/// Normalised Gaussian density  mass * (2 pi s^2)^{-1/2} exp(-x^2 / (2 s^2)).
struct Gaussian {
  double mass = 1.0;
  double width = 1.0;
};

/// Two-sided exponential density  mass * (rate / 2) exp(-rate |x|).
struct Laplace {
  double mass = 1.0;
  double rate = 1.0;
};

/// Box density  mass / (2 h)  on [-h, h].
struct Uniform {
  double mass = 1.0;
  double half_width = 1.0;
};

using SmoothPart = std::variant<Gaussian, Laplace, Uniform>;

struct Atom {
  double position;
  double weight;
};

class KernelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A finite symmetric measure on the real line: Dirac atoms plus an optional
/// even density with a closed-form Fourier transform.
///
/// Immutable after construction. Symmetry is checked on construction; use
/// `from_half_line` to mirror a list of atoms with x >= 0.
class KernelMeasure {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  KernelMeasure() = default;

  /// Takes the full atom list and validates that it is symmetric.
  KernelMeasure(std::vector<Atom> atoms, std::optional<SmoothPart> smooth);

  /// Atoms at x > 0 are mirrored to -x with equal weight; an atom at 0 is kept once.
  static KernelMeasure from_half_line(const std::vector<Atom>& half_atoms,
                                      std::optional<SmoothPart> smooth = std::nullopt);

  static KernelMeasure zero() { return {}; }
  static KernelMeasure dirac(double weight = 1.0) { return KernelMeasure({{0.0, weight}}, std::nullopt); }
  static KernelMeasure gaussian(double mass, double width) {
    return KernelMeasure({}, SmoothPart{Gaussian{mass, width}});
  }
  static KernelMeasure laplace(double mass, double rate) {
    return KernelMeasure({}, SmoothPart{Laplace{mass, rate}});
  }
  static KernelMeasure uniform(double mass, double half_width) {
    return KernelMeasure({}, SmoothPart{Uniform{mass, half_width}});
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<SmoothPart>& smooth() const { return smooth_; }
  bool is_zero() const;

 private:
  std::vector<Atom> atoms_;
  std::optional<SmoothPart> smooth_;
};

/// q(k) = \int e^{ikx} Q(dx), real and even for symmetric measures.
double fourier_symbol(const KernelMeasure& kernel, double k);

double total_variation(const KernelMeasure& kernel);
double first_moment(const KernelMeasure& kernel);

/// q_n for integer n; values[n] == values[-n].
struct FourierCoefficientTable {
  std::map<int, double> values;
  double at(int n) const { return values.at(n); }
};

FourierCoefficientTable coefficient_table(const KernelMeasure& kernel, int n_max);

/// Config block: {"atoms": [[x, w], ...], "smooth": {"family": ..., ...}}.
/// Only atoms with x >= 0 are listed.
KernelMeasure kernel_from_json(const nlohmann::json& j);
nlohmann::json kernel_to_json(const KernelMeasure& kernel);

}  // namespace nlsh
