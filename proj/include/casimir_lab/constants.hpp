#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "casimir_lab/error.hpp"

namespace casimir_lab {

/// Physical constants, SI units (CODATA 2018; e, h, k_B and c are exact).
namespace constants {

inline constexpr double pi = std::numbers::pi;

/// Reduced Planck constant [J s].
inline constexpr double hbar = 6.62607015e-34 / (2.0 * pi);
/// Speed of light in vacuum [m/s].
inline constexpr double c = 299792458.0;
/// Boltzmann constant [J/K].
inline constexpr double k_B = 1.380649e-23;
/// Vacuum permittivity [F/m].
inline constexpr double eps0 = 8.8541878128e-12;
/// Elementary charge, i.e. one electronvolt in joules [J/eV].
inline constexpr double eV = 1.602176634e-19;
/// Riemann zeta(3) (Apery's constant).
inline constexpr double zeta3 = 1.2020569031595942854;
/// Angular frequency of a photon of energy 1 eV [rad/s per eV].
inline constexpr double eV_to_rad_per_s = eV / hbar;

}  // namespace constants

/// Unit conversion factors. Internal computation is SI throughout; these
/// are only used where values enter or leave the library.
namespace units {

inline constexpr double um = 1e-6;   // m
inline constexpr double nm = 1e-9;   // m
inline constexpr double cm = 1e-2;   // m
inline constexpr double pN = 1e-12;  // N
inline constexpr double mV = 1e-3;   // V

}  // namespace units

inline double convert_energy_to_angular_frequency(double energy_ev) {
  if (!(energy_ev >= 0.0) || !std::isfinite(energy_ev)) {
    throw DomainError("energy must be finite and non-negative, got " + std::to_string(energy_ev) + " eV");
  }
  return energy_ev * constants::eV_to_rad_per_s;
}

inline double convert_angular_frequency_to_energy(double omega) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw DomainError("angular frequency must be finite and non-negative");
  }
  return omega / constants::eV_to_rad_per_s;
}

/// Surface-to-surface distance, stored in metres. Always strictly positive.
class Separation {
 public:
  explicit Separation(double meters) : m_(meters) {
    if (!(meters > 0.0) || !std::isfinite(meters)) {
      throw DomainError("separation must be positive and finite, got " + std::to_string(meters) + " m");
    }
  }

  static Separation from_um(double v) { return Separation(v * units::um); }
  static Separation from_nm(double v) { return Separation(v * units::nm); }

  double meters() const noexcept { return m_; }
  double um() const noexcept { return m_ / units::um; }
  double nm() const noexcept { return m_ / units::nm; }

  friend bool operator==(const Separation&, const Separation&) = default;
  friend auto operator<=>(const Separation&, const Separation&) = default;

 private:
  double m_;
};

/// Absolute temperature in kelvin. Zero selects the zero-temperature formulation.
class Temperature {
 public:
  explicit Temperature(double kelvin) : k_(kelvin) {
    if (!(kelvin >= 0.0) || !std::isfinite(kelvin)) {
      throw DomainError("temperature must be finite and non-negative, got " + std::to_string(kelvin) + " K");
    }
  }

  double kelvin() const noexcept { return k_; }
  bool is_zero() const noexcept { return k_ == 0.0; }

  friend bool operator==(const Temperature&, const Temperature&) = default;
  friend auto operator<=>(const Temperature&, const Temperature&) = default;

 private:
  double k_;
};

/// A force in newtons. Attractive forces are negative.
struct ForceValue {
  double newtons = 0.0;

  double piconewtons() const noexcept { return newtons / units::pN; }
  bool attractive() const noexcept { return newtons < 0.0; }

  static ForceValue from_pN(double v) { return ForceValue{v * units::pN}; }

  friend ForceValue operator+(ForceValue a, ForceValue b) { return {a.newtons + b.newtons}; }
  friend ForceValue operator-(ForceValue a, ForceValue b) { return {a.newtons - b.newtons}; }
  friend ForceValue operator*(double s, ForceValue f) { return {s * f.newtons}; }
  friend bool operator==(const ForceValue&, const ForceValue&) = default;
};

}  // namespace casimir_lab
