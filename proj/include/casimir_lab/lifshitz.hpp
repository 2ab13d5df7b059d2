#pragma once

// Lifshitz free energy, pressure and entropy between two identical parallel
// plates, evaluated on the imaginary frequency axis.
//
// With y = 2 q d (q the vacuum normal wave number) and zeta_l = 2 xi_l d / c,
//
//   F(d,T) =  k_B T / (8 pi d^2) sum'_l int_{zeta_l}^inf y  sum_a ln(1 - r_a^2 e^{-y}) dy
//   P(d,T) = -k_B T / (8 pi d^3) sum'_l int_{zeta_l}^inf y^2 sum_a r_a^2 e^{-y} / (1 - r_a^2 e^{-y}) dy
//
// where the prime halves the l = 0 term. At T = 0 the Matsubara sum becomes
// an integral over zeta with prefactor hbar c / (32 pi^2 d^3) (resp. d^4).

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "casimir_lab/constants.hpp"
#include "casimir_lab/error.hpp"
#include "casimir_lab/permittivity.hpp"
#include "casimir_lab/quadrature.hpp"

namespace casimir_lab {

struct LifshitzQuery {
  Separation d;
  Temperature T;
  double rel_tol = 1e-7;
  std::size_t max_matsubara_terms = 1'000'000;

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw DomainError("rel_tol must lie in (0, 1e-2]");
    if (max_matsubara_terms < 10) throw DomainError("max_matsubara_terms must be at least 10");
  }
};

/// Free energy per unit area [J/m^2]; negative for attraction.
struct FreeEnergyPerArea {
  double value = 0.0;
  double est_error = 0.0;
  std::size_t matsubara_terms = 0;
};

/// Pressure [Pa]; negative for attraction.
struct CasimirPressure {
  double value = 0.0;
  double est_error = 0.0;
  std::size_t matsubara_terms = 0;
};

/// Entropy per unit area [J/(K m^2)].
struct EntropyPerArea {
  double value = 0.0;
  double est_error = 0.0;
};

struct ReflectionCoefficients {
  double tm;
  double te;
};

/// xi_l = 2 pi k_B T l / hbar for l = 1..count. The l = 0 term is handled separately.
inline std::vector<double> matsubara_frequencies(Temperature T, std::size_t count) {
  if (T.is_zero()) throw DomainError("matsubara_frequencies: T = 0 has no discrete spectrum; use the T = 0 path");
  if (count < 1) throw DomainError("matsubara_frequencies: count must be >= 1");
  const double xi1 = 2.0 * constants::pi * constants::k_B * T.kelvin() / constants::hbar;
  std::vector<double> xi(count);
  for (std::size_t l = 0; l < count; ++l) xi[l] = xi1 * static_cast<double>(l + 1);
  return xi;
}

/// Fresnel coefficients on the imaginary axis for transverse wave number k
/// [1/m] and frequency xi [rad/s].
inline ReflectionCoefficients reflection_coefficients(double eps, double k, double xi) {
  if (!(eps >= 1.0) || !std::isfinite(eps)) throw DomainError("reflection_coefficients: eps must be finite and >= 1");
  if (!(k >= 0.0) || !(xi >= 0.0) || !std::isfinite(k) || !std::isfinite(xi)) {
    throw DomainError("reflection_coefficients: k and xi must be finite and non-negative");
  }
  if (k == 0.0 && xi == 0.0) throw DomainError("reflection_coefficients: k and xi cannot both vanish");
  const double xc = xi / constants::c;
  const double q = std::sqrt(k * k + xc * xc);
  const double k1 = std::sqrt(k * k + eps * xc * xc);
  return {(eps * q - k1) / (eps * q + k1), (q - k1) / (q + k1)};
}

namespace detail {

// Reflection data for one Matsubara mode in the dimensionless variable y.
//   s_a = sqrt(y^2 + a_a);  r_TE = (y - s_te)/(y + s_te);  r_TM = (eps y - s_tm)/(eps y + s_tm)
// eps = +inf marks a perfectly reflecting TM channel.
struct Mode {
  double eps;
  double a_tm;
  double a_te;
};

// ln r^2 for both polarizations, accurate when |r| is close to 1.
inline std::pair<double, double> log_r2(const Mode& m, double y) {
  double tm = 0.0;
  if (std::isfinite(m.eps)) {
    const double s = std::sqrt(y * y + m.a_tm);
    const double p = m.eps * y;
    const double sum = p + s;
    tm = 2.0 * (p >= s ? std::log1p(-2.0 * s / sum) : std::log1p(-2.0 * p / sum));
  }
  const double s = std::sqrt(y * y + m.a_te);
  const double te = 2.0 * std::log1p(-2.0 * y / (y + s));
  return {tm, te};
}

enum class Kernel { free_energy, pressure };

// ln(1 - e^x) for x <= 0, accurate at both ends.
inline double log1mexp(double x) {
  return x > -0.6931471805599453 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

inline double kernel(Kernel which, const Mode& m, double y) {
  if (!(y > 0.0)) return 0.0;
  const auto [tm, te] = log_r2(m, y);
  double out = 0.0;
  for (const double lr : {tm, te}) {
    const double x = lr - y;  // ln(r^2 e^{-y})
    if (which == Kernel::free_energy) {
      out += y * log1mexp(x);
    } else {
      out += y * y * std::exp(x) / -std::expm1(x);
    }
  }
  return out;
}

inline Mode mode_at(const PermittivityModel& model, double xi, double zeta) {
  const double eps = eval_permittivity(model, xi);
  const double a = (eps - 1.0) * zeta * zeta;
  return {eps, a, a};
}

inline Mode zero_mode(const PermittivityModel& model, double d) {
  const auto zf = zero_frequency_behavior(model);
  using K = ZeroFrequency::Kind;
  switch (zf.kind) {
    case K::finite:
      return {zf.coefficient, 0.0, 0.0};
    case K::diverges_as_1_over_xi:
      return {std::numeric_limits<double>::infinity(), 0.0, 0.0};
    case K::diverges_as_1_over_xi_squared: {
      const double kappa = 2.0 * d * std::sqrt(zf.coefficient) / constants::c;
      return {std::numeric_limits<double>::infinity(), 0.0, kappa * kappa};
    }
  }
  return {};
}

// int_{zeta}^inf kernel(y) dy
inline quad::Result mode_integral(Kernel which, const Mode& m, double zeta, double rel_tol) {
  auto f = [&](double t) { return kernel(which, m, zeta + t); };
  return quad::integrate_to_infinity(f, 0.0, 1.0, {0.0, rel_tol, 4000});
}

struct SeriesResult {
  double sum = 0.0;  // dimensionless sum'_l I_l
  double error = 0.0;
  std::size_t terms = 0;
};

inline SeriesResult matsubara_series(Kernel which, const PermittivityModel& model, const LifshitzQuery& q) {
  const double d = q.d.meters();
  const double xi1 = 2.0 * constants::pi * constants::k_B * q.T.kelvin() / constants::hbar;
  const double dzeta = 2.0 * xi1 * d / constants::c;
  const double term_tol = 0.25 * q.rel_tol;

  SeriesResult out;
  quad::CompensatedSum sum;
  const auto zero = mode_integral(which, zero_mode(model, d), 0.0, term_tol);
  sum += 0.5 * zero.value;
  out.error += 0.5 * zero.error;
  out.terms = 1;

  double previous = std::abs(zero.value);
  double tail = std::numeric_limits<double>::infinity();
  for (std::size_t l = 1; l < q.max_matsubara_terms; ++l) {
    const double zeta = dzeta * static_cast<double>(l);
    const double xi = xi1 * static_cast<double>(l);
    const auto term = mode_integral(which, mode_at(model, xi, zeta), zeta, term_tol);
    sum += term.value;
    out.error += term.error;
    out.terms = l + 1;
    const double mag = std::abs(term.value);
    const double ratio = previous > 0.0 ? mag / previous : 0.0;
    previous = mag;
    tail = ratio < 1.0 ? mag * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
    if (mag == 0.0) tail = 0.0;
    if (zeta > 10.0 && tail <= 0.5 * q.rel_tol * std::abs(sum.value())) break;
  }
  out.sum = sum.value();
  if (!(tail <= 0.5 * q.rel_tol * std::abs(out.sum))) {
    throw ConvergenceError("Matsubara series hit the term cap before converging", out.sum, out.error + tail);
  }
  out.error += tail;
  return out;
}

// int_0^inf dzeta int_zeta^inf kernel dy at T = 0.
inline SeriesResult zero_temperature_integral(Kernel which, const PermittivityModel& model, const LifshitzQuery& q) {
  const double d = q.d.meters();
  const double inner_tol = 0.01 * q.rel_tol;
  auto outer = [&](double zeta) {
    if (!(zeta > 0.0)) zeta = std::numeric_limits<double>::min();
    const double xi = zeta * constants::c / (2.0 * d);
    return mode_integral(which, mode_at(model, xi, zeta), zeta, inner_tol).value;
  };
  const auto r = quad::integrate_to_infinity(outer, 0.0, 1.0, {0.0, 0.25 * q.rel_tol, 4000});
  if (!r.converged) throw ConvergenceError("zero-temperature frequency integral did not converge", r.value, r.error);
  // Inner integrals are single-signed with relative error <= inner_tol each.
  return {r.value, r.error + inner_tol * std::abs(r.value), 0};
}

inline void check_result(const char* what, double value, double error, double rel_tol) {
  if (!std::isfinite(value) || error > rel_tol * std::abs(value)) {
    throw ConvergenceError(std::string(what) + ": error bound exceeds tolerance", value, error);
  }
}

}  // namespace detail

inline FreeEnergyPerArea free_energy_per_area(const PermittivityModel& model, const LifshitzQuery& q) {
  q.validate();
  const double d = q.d.meters();
  FreeEnergyPerArea out;
  if (q.T.is_zero()) {
    const auto s = detail::zero_temperature_integral(detail::Kernel::free_energy, model, q);
    const double pref = constants::hbar * constants::c / (32.0 * constants::pi * constants::pi * d * d * d);
    out = {pref * s.sum, pref * s.error, 0};
  } else {
    const auto s = detail::matsubara_series(detail::Kernel::free_energy, model, q);
    const double pref = constants::k_B * q.T.kelvin() / (8.0 * constants::pi * d * d);
    out = {pref * s.sum, pref * s.error, s.terms};
  }
  detail::check_result("free_energy_per_area", out.value, out.est_error, q.rel_tol);
  return out;
}

/// -dF/dd from the pressure kernel (no numerical differentiation).
inline CasimirPressure casimir_pressure(const PermittivityModel& model, const LifshitzQuery& q) {
  q.validate();
  const double d = q.d.meters();
  const double d4 = d * d * d * d;
  CasimirPressure out;
  if (q.T.is_zero()) {
    const auto s = detail::zero_temperature_integral(detail::Kernel::pressure, model, q);
    const double pref = constants::hbar * constants::c / (32.0 * constants::pi * constants::pi * d4);
    out = {-pref * s.sum, pref * s.error, 0};
  } else {
    const auto s = detail::matsubara_series(detail::Kernel::pressure, model, q);
    const double pref = constants::k_B * q.T.kelvin() / (8.0 * constants::pi * d * d * d);
    out = {-pref * s.sum, pref * s.error, s.terms};
  }
  detail::check_result("casimir_pressure", out.value, out.est_error, q.rel_tol);
  return out;
}

/// Half-weighted l = 0 Matsubara contribution to F, split by polarization [J/m^2].
struct ZeroModeContribution {
  double tm;
  double te;
};

inline ZeroModeContribution zero_mode_contribution(const PermittivityModel& model, Separation d, Temperature T,
                                                   double rel_tol = 1e-10) {
  if (T.is_zero()) throw DomainError("zero_mode_contribution: T must be positive");
  const double dm = d.meters();
  const double pref = 0.5 * constants::k_B * T.kelvin() / (8.0 * constants::pi * dm * dm);
  const auto m = detail::zero_mode(model, dm);
  const auto tm_only = detail::Mode{m.eps, m.a_tm, 0.0};  // r_TE = 0 when a_te = 0
  const auto te_only = detail::Mode{1.0, 0.0, m.a_te};     // r_TM = 0 when eps = 1, a_tm = 0
  const auto tm = detail::mode_integral(detail::Kernel::free_energy, tm_only, 0.0, rel_tol);
  const auto te = detail::mode_integral(detail::Kernel::free_energy, te_only, 0.0, rel_tol);
  return {pref * tm.value, pref * te.value};
}

/// S = -dF/dT by central difference with step dT. Both free energies are
/// computed at rel_tol/10; the quoted error adds the propagated numerical
/// error to a Richardson estimate of the step error (from a dT/2 pass).
inline EntropyPerArea entropy_per_area(const PermittivityModel& model, Separation d, Temperature T, double dT,
                                       double rel_tol = 1e-11) {
  if (!(dT > 0.0) || !(T.kelvin() > dT)) throw DomainError("entropy_per_area: requires T > dT > 0");
  const double tol = rel_tol / 10.0;
  auto central = [&](double h, double& err) {
    const auto hi = free_energy_per_area(model, {d, Temperature(T.kelvin() + h), tol});
    const auto lo = free_energy_per_area(model, {d, Temperature(T.kelvin() - h), tol});
    err = (hi.est_error + lo.est_error) / (2.0 * h);
    return -(hi.value - lo.value) / (2.0 * h);
  };
  double err_h = 0.0;
  double err_h2 = 0.0;
  const double s_h = central(dT, err_h);
  const double s_h2 = central(0.5 * dT, err_h2);
  const double step_error = 4.0 / 3.0 * std::abs(s_h - s_h2);
  return {s_h, err_h + err_h2 + step_error};
}

enum class Approach { drude, plasma };

/// Large-separation sphere-plate force: -zeta(3) R k_B T / (8 d^2) (Drude),
/// twice that for the plasma approach.
inline ForceValue asymptotic_force(Approach approach, double radius, Separation d, Temperature T) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("asymptotic_force: radius must be positive");
  if (T.is_zero()) throw DomainError("asymptotic_force: T must be positive");
  const double dm = d.meters();
  const double drude = -constants::zeta3 * radius * constants::k_B * T.kelvin() / (8.0 * dm * dm);
  return {approach == Approach::drude ? drude : 2.0 * drude};
}

}  // namespace casimir_lab
