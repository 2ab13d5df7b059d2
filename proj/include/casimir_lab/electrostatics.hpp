#pragma once

// Electrostatic lens-plate forces in the PFA regime:
//   large patches          F = -pi eps0 R V_rms^2 / d
//   applied voltage V      F = -pi eps0 R [(V - V_m)^2 + V_rms^2] / d
// Small patches (size << d) give an exponentially small force and are taken as zero.

#include <cmath>

#include "casimir_lab/constants.hpp"
#include "casimir_lab/error.hpp"

namespace casimir_lab {

struct ElectrostaticParams {
  double V = 0.0;      // applied voltage [V]
  double V_m = 0.0;    // residual potential difference [V]
  double V_rms = 0.0;  // patch-voltage fluctuation scale [V]
  // Optional linear drift of V_m with separation: V_m(d) = V_m + vm_slope (d - vm_ref_d).
  double vm_slope = 0.0;  // [V/m]
  double vm_ref_d = 0.0;  // [m]

  double residual_at(double d) const { return V_m + vm_slope * (d - vm_ref_d); }
};

/// Admissible size window d << lambda << sqrt(R d) for large patches.
struct PatchScaleReport {
  double r_eff;
  double lambda_lo;
  double lambda_hi;
  double lambda_geo;

  bool contains(double lambda) const { return lambda > lambda_lo && lambda < lambda_hi; }
};

namespace detail {

inline void check_lens(double R) {
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("lens radius must be positive");
}

}  // namespace detail

inline ForceValue patch_force(double R, double V_rms, Separation d) {
  detail::check_lens(R);
  if (!(V_rms >= 0.0) || !std::isfinite(V_rms)) throw DomainError("V_rms must be finite and non-negative");
  return {-constants::pi * constants::eps0 * R * (V_rms * V_rms) / d.meters()};
}

inline ForceValue applied_voltage_force(double R, const ElectrostaticParams& p, Separation d) {
  detail::check_lens(R);
  if (!(p.V_rms >= 0.0)) throw DomainError("V_rms must be non-negative");
  const double dv = p.V - p.residual_at(d.meters());
  return {-constants::pi * constants::eps0 * R * (dv * dv + p.V_rms * p.V_rms) / d.meters()};
}

inline PatchScaleReport patch_scale_window(double R, Separation d) {
  const double dm = d.meters();
  if (!(R > dm)) throw DomainError("patch window needs R > d");
  const double r_eff = std::sqrt(R * dm);
  return {r_eff, dm, r_eff, std::sqrt(dm * r_eff)};
}

}  // namespace casimir_lab
