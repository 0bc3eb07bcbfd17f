#include "nlsh/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace nlsh {

namespace {

struct SymbolVisitor {
  double k;
  double operator()(const Gaussian& g) const {
    return g.mass * std::exp(-0.5 * k * k * g.width * g.width);
  }
  double operator()(const Laplace& l) const {
    return l.mass * l.rate * l.rate / (l.rate * l.rate + k * k);
  }
  double operator()(const Uniform& u) const {
    const double z = k * u.half_width;
    if (std::abs(z) < 1e-4) return u.mass * (1.0 - z * z / 6.0 + z * z * z * z / 120.0);
    return u.mass * std::sin(z) / z;
  }
};

struct MomentVisitor {
  double operator()(const Gaussian& g) const {
    return std::abs(g.mass) * g.width * std::sqrt(2.0 / std::numbers::pi);
  }
  double operator()(const Laplace& l) const { return std::abs(l.mass) / l.rate; }
  double operator()(const Uniform& u) const { return std::abs(u.mass) * u.half_width / 2.0; }
};

double smooth_mass(const SmoothPart& s) {
  return std::visit([](const auto& f) { return f.mass; }, s);
}

void validate_smooth(const SmoothPart& s) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        double scale = 0.0;
        if constexpr (std::is_same_v<T, Gaussian>) scale = f.width;
        if constexpr (std::is_same_v<T, Laplace>) scale = f.rate;
        if constexpr (std::is_same_v<T, Uniform>) scale = f.half_width;
        if (!std::isfinite(f.mass) || !(scale > 0.0) || !std::isfinite(scale))
          throw KernelError("smooth kernel part needs finite mass and positive scale");
      },
      s);
}

}  // namespace

KernelMeasure::KernelMeasure(std::vector<Atom> atoms, std::optional<SmoothPart> smooth)
    : atoms_(std::move(atoms)), smooth_(std::move(smooth)) {
  for (const auto& a : atoms_) {
    if (!std::isfinite(a.position) || !std::isfinite(a.weight))
      throw KernelError("kernel atom with non-finite position or weight");
  }
  if (smooth_) validate_smooth(*smooth_);

  // Every atom needs a mirror partner of equal weight. Greedy matching is
  // enough: the tolerance is far below any meaningful atom spacing.
  std::vector<bool> used(atoms_.size(), false);
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (used[i]) continue;
    const auto& a = atoms_[i];
    if (std::abs(a.position) <= kSymmetryTolerance) {
      used[i] = true;
      continue;
    }
    bool matched = false;
    for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
      if (used[j]) continue;
      const auto& b = atoms_[j];
      if (std::abs(a.position + b.position) <= kSymmetryTolerance &&
          std::abs(a.weight - b.weight) <= kSymmetryTolerance) {
        used[i] = used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched)
      throw KernelError("kernel atoms are not symmetric: no mirror for atom at x = " +
                        std::to_string(a.position));
  }
}

KernelMeasure KernelMeasure::from_half_line(const std::vector<Atom>& half_atoms,
                                            std::optional<SmoothPart> smooth) {
  std::vector<Atom> full;
  for (const auto& a : half_atoms) {
    if (a.position < 0.0) throw KernelError("half-line atom list must have x >= 0");
    full.push_back(a);
    if (a.position > 0.0) full.push_back({-a.position, a.weight});
  }
  return KernelMeasure(std::move(full), std::move(smooth));
}

bool KernelMeasure::is_zero() const {
  const bool atoms_zero =
      std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.weight == 0.0; });
  return atoms_zero && (!smooth_ || smooth_mass(*smooth_) == 0.0);
}

double fourier_symbol(const KernelMeasure& kernel, double k) {
  double value = 0.0;
  for (const auto& a : kernel.atoms()) value += a.weight * std::cos(k * a.position);
  if (kernel.smooth()) value += std::visit(SymbolVisitor{k}, *kernel.smooth());
  return value;
}

double total_variation(const KernelMeasure& kernel) {
  double tv = 0.0;
  for (const auto& a : kernel.atoms()) tv += std::abs(a.weight);
  if (kernel.smooth()) tv += std::abs(smooth_mass(*kernel.smooth()));
  return tv;
}

double first_moment(const KernelMeasure& kernel) {
  double m = 0.0;
  for (const auto& a : kernel.atoms()) m += std::abs(a.position) * std::abs(a.weight);
  if (kernel.smooth()) m += std::visit(MomentVisitor{}, *kernel.smooth());
  return m;
}

FourierCoefficientTable coefficient_table(const KernelMeasure& kernel, int n_max) {
  if (n_max < 0) throw std::invalid_argument("coefficient_table: n_max must be >= 0");
  FourierCoefficientTable table;
  for (int n = 0; n <= n_max; ++n) {
    const double v = fourier_symbol(kernel, static_cast<double>(n));
    table.values[n] = v;
    table.values[-n] = v;
  }
  return table;
}

KernelMeasure kernel_from_json(const nlohmann::json& j) {
  if (j.is_null()) return KernelMeasure::zero();
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "zero") return KernelMeasure::zero();
    if (name == "dirac") return KernelMeasure::dirac();
    throw KernelError("unknown kernel shorthand '" + name + "'");
  }
  std::vector<Atom> half;
  if (j.contains("atoms")) {
    for (const auto& pair : j.at("atoms")) {
      if (!pair.is_array() || pair.size() != 2) throw KernelError("kernel atoms must be [x, w] pairs");
      half.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
  }
  std::optional<SmoothPart> smooth;
  if (j.contains("smooth") && !j.at("smooth").is_null()) {
    const auto& s = j.at("smooth");
    const auto family = s.at("family").get<std::string>();
    const double mass = s.value("mass", 1.0);
    if (family == "gaussian") {
      smooth = Gaussian{mass, s.value("width", 1.0)};
    } else if (family == "laplace") {
      smooth = Laplace{mass, s.value("rate", 1.0)};
    } else if (family == "uniform") {
      smooth = Uniform{mass, s.value("half_width", 1.0)};
    } else {
      throw KernelError("unknown smooth kernel family '" + family + "'");
    }
  }
  return KernelMeasure::from_half_line(half, smooth);
}

nlohmann::json kernel_to_json(const KernelMeasure& kernel) {
  nlohmann::json j;
  j["atoms"] = nlohmann::json::array();
  for (const auto& a : kernel.atoms()) {
    if (a.position >= 0.0) j["atoms"].push_back({a.position, a.weight});
  }
  if (kernel.smooth()) {
    j["smooth"] = std::visit(
        [](const auto& f) -> nlohmann::json {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Gaussian>)
            return {{"family", "gaussian"}, {"mass", f.mass}, {"width", f.width}};
          else if constexpr (std::is_same_v<T, Laplace>)
            return {{"family", "laplace"}, {"mass", f.mass}, {"rate", f.rate}};
          else
            return {{"family", "uniform"}, {"mass", f.mass}, {"half_width", f.half_width}};
        },
        *kernel.smooth());
  }
  return j;
}

}  // namespace nlsh
