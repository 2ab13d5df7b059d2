#pragma once

// Dielectric permittivity on the imaginary frequency axis, eps(i xi).
//
// All frequencies are angular frequencies in rad/s. Every model returns a
// real value >= 1 for xi > 0; the xi -> 0 limit is described separately by
// zero_frequency_behavior() because the metallic models diverge there.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "casimir_lab/constants.hpp"
#include "casimir_lab/csv.hpp"
#include "casimir_lab/error.hpp"
#include "casimir_lab/quadrature.hpp"

namespace casimir_lab {

struct Drude {
  double omega_p;  // plasma frequency
  double gamma;    // relaxation parameter
};

struct Plasma {
  double omega_p;
};

/// Lorentz oscillator g / (omega^2 + xi^2 + damping xi); g in rad^2/s^2.
struct Oscillator {
  double strength;
  double omega;
  double damping;
};

struct GeneralizedPlasma {
  double omega_p;
  std::vector<Oscillator> oscillators;
};

/// Undamped oscillator term C / (1 + xi^2/omega^2) of an insulator core.
struct CoreOscillator {
  double strength;  // dimensionless C_j
  double omega;
};

/// Core permittivity 1 + sum_j C_j / (1 + xi^2/omega_j^2); static value 1 + sum_j C_j.
using StaticPermittivityTable = std::vector<CoreOscillator>;

/// Insulator with an optional dc-conductivity term sigma0 / xi
/// (sigma0 in rad/s, i.e. 4 pi sigma expressed as a frequency).
struct DielectricCore {
  StaticPermittivityTable table;
  bool include_dc = false;
  double sigma0 = 0.0;
};

struct OpticalRow {
  double omega;   // real frequency
  double im_eps;  // Im eps(omega)
};

/// Tabulated Im eps(omega) on the real axis, strictly increasing in omega.
class OpticalDataTable {
 public:
  explicit OpticalDataTable(std::vector<OpticalRow> rows) : rows_(std::move(rows)) {
    if (rows_.size() < 2) throw DataError("optical data table needs at least 2 rows");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      if (!(r.omega > 0.0) || !std::isfinite(r.omega)) throw DataError("optical data: frequencies must be positive");
      if (!(r.im_eps >= 0.0) || !std::isfinite(r.im_eps)) {
        throw DataError("optical data: Im eps must be finite and non-negative (row " + std::to_string(i + 1) + ")");
      }
      if (i > 0 && !(r.omega > rows_[i - 1].omega)) {
        throw DataError("optical data: frequencies must be strictly increasing (row " + std::to_string(i + 1) + ")");
      }
    }
  }

  const std::vector<OpticalRow>& rows() const noexcept { return rows_; }
  double omega_min() const noexcept { return rows_.front().omega; }
  double omega_max() const noexcept { return rows_.back().omega; }

  /// Linear interpolation inside the table, zero outside.
  double im_eps(double omega) const {
    if (omega < omega_min() || omega > omega_max()) return 0.0;
    const auto it = std::upper_bound(rows_.begin(), rows_.end(), omega,
                                     [](double w, const OpticalRow& r) { return w < r.omega; });
    if (it == rows_.end()) return rows_.back().im_eps;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (omega - lo.omega) / (hi.omega - lo.omega);
    return lo.im_eps + t * (hi.im_eps - lo.im_eps);
  }

 private:
  std::vector<OpticalRow> rows_;
};

/// CSV with header `omega_ev,im_eps`.
inline OpticalDataTable load_optical_table(const std::string& path) {
  const auto t = csv::read_file(path, {"omega_ev", "im_eps"});
  std::vector<OpticalRow> rows;
  rows.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    if (r[0] <= 0.0) throw DataError(path + ": omega_ev must be positive");
    rows.push_back({convert_energy_to_angular_frequency(r[0]), r[1]});
  }
  return OpticalDataTable(std::move(rows));
}

/// Low-frequency extrapolation of tabulated data: Drude absorption below the table.
struct DrudeTail {
  double omega_p;
  double gamma;
};

/// Dissipationless extrapolation: contributes omega_p^2/xi^2, nothing below the table.
struct PlasmaTail {
  double omega_p;
};

using Extrapolation = std::variant<DrudeTail, PlasmaTail>;

struct TabulatedOptical {
  OpticalDataTable data;
  Extrapolation tail;
  double rel_tol = 1e-6;
};

/// Tagged union of the supported response models. Validated on construction.
class PermittivityModel {
 public:
  using Variant = std::variant<Drude, Plasma, GeneralizedPlasma, DielectricCore, TabulatedOptical>;

  template <class T>
    requires std::is_constructible_v<Variant, T&&> && (!std::is_same_v<std::decay_t<T>, PermittivityModel>)
  PermittivityModel(T&& m) : v_(std::forward<T>(m)) {  // NOLINT(google-explicit-constructor)
    validate();
  }

  const Variant& variant() const noexcept { return v_; }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&v_);
  }

  std::string name() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Drude>) return "drude";
          if constexpr (std::is_same_v<T, Plasma>) return "plasma";
          if constexpr (std::is_same_v<T, GeneralizedPlasma>) return "gplasma";
          if constexpr (std::is_same_v<T, DielectricCore>) return "dielectric";
          if constexpr (std::is_same_v<T, TabulatedOptical>) return "tabulated";
        },
        v_);
  }

 private:
  static void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
  }
  static bool positive(double x) { return x > 0.0 && std::isfinite(x); }
  static bool nonneg(double x) { return x >= 0.0 && std::isfinite(x); }

  void validate() const {
    std::visit(
        [](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Drude>) {
            require(positive(m.omega_p), "Drude: omega_p must be positive");
            require(nonneg(m.gamma), "Drude: gamma must be non-negative");
            require(m.gamma > 0.0, "Drude: gamma = 0 is the plasma model; construct Plasma instead");
          } else if constexpr (std::is_same_v<T, Plasma>) {
            require(positive(m.omega_p), "Plasma: omega_p must be positive");
          } else if constexpr (std::is_same_v<T, GeneralizedPlasma>) {
            require(positive(m.omega_p), "GeneralizedPlasma: omega_p must be positive");
            for (const auto& o : m.oscillators) {
              require(nonneg(o.strength) && nonneg(o.omega) && nonneg(o.damping),
                      "GeneralizedPlasma: oscillator parameters must be non-negative");
              require(o.omega > 0.0 || o.damping > 0.0, "GeneralizedPlasma: oscillator with omega = damping = 0");
            }
          } else if constexpr (std::is_same_v<T, DielectricCore>) {
            for (const auto& o : m.table) {
              require(nonneg(o.strength), "DielectricCore: oscillator strength must be non-negative");
              require(positive(o.omega), "DielectricCore: oscillator frequency must be positive");
            }
            require(nonneg(m.sigma0), "DielectricCore: sigma0 must be non-negative");
            require(!m.include_dc || m.sigma0 > 0.0, "DielectricCore: include_dc needs sigma0 > 0");
          } else if constexpr (std::is_same_v<T, TabulatedOptical>) {
            require(m.rel_tol > 0.0 && m.rel_tol < 1e-1, "TabulatedOptical: rel_tol out of range");
            std::visit(
                [](const auto& tail) {
                  using U = std::decay_t<decltype(tail)>;
                  require(positive(tail.omega_p), "extrapolation tail: omega_p must be positive");
                  if constexpr (std::is_same_v<U, DrudeTail>) {
                    require(positive(tail.gamma), "Drude tail: gamma must be positive");
                  }
                },
                m.tail);
          }
        },
        v_);
  }

  Variant v_;
};

namespace presets {

/// Conventional gold parameters: omega_p = 9.0 eV, gamma = 0.035 eV.
inline constexpr double au_omega_p_ev = 9.0;
inline constexpr double au_gamma_ev = 0.035;

inline PermittivityModel au_drude() {
  return Drude{convert_energy_to_angular_frequency(au_omega_p_ev), convert_energy_to_angular_frequency(au_gamma_ev)};
}

inline PermittivityModel au_plasma() { return Plasma{convert_energy_to_angular_frequency(au_omega_p_ev)}; }

}  // namespace presets

/// 1 + (2/pi) int_0^inf omega Im eps(omega) / (omega^2 + xi^2) d omega, with
/// the tail model supplying Im eps below the table and zero above it.
inline double kramers_kronig_imaginary_axis(const OpticalDataTable& table, const Extrapolation& tail, double xi,
                                            double rel_tol = 1e-6) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("Kramers-Kronig: xi must be positive");
  const double xi2 = xi * xi;
  const quad::Tolerance tol{0.0, rel_tol * 1e-2, 2000};
  quad::CompensatedSum integral;
  double error = 0.0;
  bool converged = true;
  double extra = 0.0;

  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, DrudeTail>) {
          // omega * Im eps_Drude(omega) = wp^2 gamma / (omega^2 + gamma^2)
          const double wp2g = t.omega_p * t.omega_p * t.gamma;
          const double g2 = t.gamma * t.gamma;
          auto f = [&](double w) { return wp2g / ((w * w + g2) * (w * w + xi2)); };
          const auto r = quad::integrate(f, 0.0, table.omega_min(), {t.gamma, xi}, tol);
          integral += r.value;
          error += r.error;
          converged = converged && r.converged;
        } else {
          extra = t.omega_p * t.omega_p / xi2;
        }
      },
      tail);

  const auto& rows = table.rows();
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& lo = rows[i];
    const auto& hi = rows[i + 1];
    if (lo.im_eps == 0.0 && hi.im_eps == 0.0) continue;
    const double slope = (hi.im_eps - lo.im_eps) / (hi.omega - lo.omega);
    auto f = [&](double w) { return w * (lo.im_eps + slope * (w - lo.omega)) / (w * w + xi2); };
    const auto r = quad::integrate(f, lo.omega, hi.omega, {xi}, tol);
    integral += r.value;
    error += r.error;
    converged = converged && r.converged;
  }

  const double value = 1.0 + extra + (2.0 / std::numbers::pi) * integral.value();
  const double bound = (2.0 / std::numbers::pi) * error;
  if (!converged || bound > rel_tol * value) {
    throw ConvergenceError("Kramers-Kronig quadrature did not reach tolerance", value, bound);
  }
  return value;
}

/// eps(i xi) for xi > 0.
inline double eval_permittivity(const PermittivityModel& model, double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi)) {
    throw DomainError("eval_permittivity: xi must be positive and finite (use zero_frequency_behavior for xi = 0)");
  }
  return std::visit(
      [xi](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Drude>) {
          return 1.0 + m.omega_p * m.omega_p / (xi * (xi + m.gamma));
        } else if constexpr (std::is_same_v<T, Plasma>) {
          return 1.0 + (m.omega_p / xi) * (m.omega_p / xi);
        } else if constexpr (std::is_same_v<T, GeneralizedPlasma>) {
          double eps = 1.0 + (m.omega_p / xi) * (m.omega_p / xi);
          for (const auto& o : m.oscillators) eps += o.strength / (o.omega * o.omega + xi * xi + o.damping * xi);
          return eps;
        } else if constexpr (std::is_same_v<T, DielectricCore>) {
          double eps = 1.0;
          for (const auto& o : m.table) eps += o.strength / (1.0 + (xi / o.omega) * (xi / o.omega));
          if (m.include_dc) eps += m.sigma0 / xi;
          return eps;
        } else {
          return kramers_kronig_imaginary_axis(m.data, m.tail, xi, m.rel_tol);
        }
      },
      model.variant());
}

/// Leading behaviour of eps(i xi) as xi -> 0.
struct ZeroFrequency {
  enum class Kind { finite, diverges_as_1_over_xi, diverges_as_1_over_xi_squared };
  Kind kind;
  /// Static value for `finite`; coefficient of the divergent term otherwise.
  double coefficient;
};

inline ZeroFrequency zero_frequency_behavior(const PermittivityModel& model) {
  using K = ZeroFrequency::Kind;
  return std::visit(
      [](const auto& m) -> ZeroFrequency {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Drude>) {
          return {K::diverges_as_1_over_xi, m.omega_p * m.omega_p / m.gamma};
        } else if constexpr (std::is_same_v<T, Plasma> || std::is_same_v<T, GeneralizedPlasma>) {
          return {K::diverges_as_1_over_xi_squared, m.omega_p * m.omega_p};
        } else if constexpr (std::is_same_v<T, DielectricCore>) {
          if (m.include_dc) return {K::diverges_as_1_over_xi, m.sigma0};
          double eps0 = 1.0;
          for (const auto& o : m.table) eps0 += o.strength;
          return {K::finite, eps0};
        } else {
          return std::visit(
              [](const auto& t) -> ZeroFrequency {
                using U = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<U, DrudeTail>) {
                  return {K::diverges_as_1_over_xi, t.omega_p * t.omega_p / t.gamma};
                } else {
                  return {K::diverges_as_1_over_xi_squared, t.omega_p * t.omega_p};
                }
              },
              m.tail);
        }
      },
      model.variant());
}

}  // namespace casimir_lab
