#pragma once

// Proximity-force approximation for a lens (sphere) above a plate.
//
// A perfect lens of curvature radius R gives F = 2 pi R Fpp(d), with Fpp the
// plate-plate free energy per area. A lens whose surface carries an
// imperfection is described as a set of PFA patches: patch i has curvature
// radius R_i and sits at extra distance D_i, so F = 2 pi sum_i R_i Fpp(d + D_i)
// with sum_i R_i = R. A single bubble of radius R1 at the point of closest
// approach, with the rest of the lens displaced by D, is the two-patch case
// {(R - R1, D), (R1, 0)}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "casimir_lab/constants.hpp"
#include "casimir_lab/csv.hpp"
#include "casimir_lab/error.hpp"
#include "casimir_lab/lifshitz.hpp"
#include "casimir_lab/permittivity.hpp"

namespace casimir_lab {

struct SphereGeometry {
  double R;  // curvature radius [m]
  std::optional<double> R_uncertainty;

  void validate() const {
    if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("lens radius must be positive");
    if (R_uncertainty && !(*R_uncertainty >= 0.0)) throw DomainError("lens radius uncertainty must be non-negative");
  }
};

/// Bubble or pit of local curvature radius R1 at the point of closest
/// approach; the rest of the lens sits D farther away (D < 0 for a protrusion).
struct Imperfection {
  double R1;  // [m]
  double D;   // [m]
};

struct PfaPatch {
  double radius;  // [m]
  double offset;  // [m]
};

/// PFA is meant for R >> d; callers warn when R/d <= 100.
inline bool pfa_regime_ok(const SphereGeometry& g, Separation d) { return g.R / d.meters() > 100.0; }

/// Plate-plate free energy per area from the Lifshitz formula, as a callable of d.
struct LifshitzFreeEnergy {
  const PermittivityModel* model;
  Temperature T;
  double rel_tol = 1e-7;

  double operator()(Separation d) const { return free_energy_per_area(*model, {d, T, rel_tol}).value; }
};

template <class FreeEnergyFn>
ForceValue pfa_force(const SphereGeometry& g, FreeEnergyFn&& free_energy, Separation d) {
  g.validate();
  return {2.0 * constants::pi * g.R * free_energy(d)};
}

inline ForceValue pfa_force(const SphereGeometry& g, const PermittivityModel& model, Separation d, Temperature T,
                            double rel_tol = 1e-7) {
  return pfa_force(g, LifshitzFreeEnergy{&model, T, rel_tol}, d);
}

/// Sum over patches; the patch radii must add up to R.
template <class FreeEnergyFn>
ForceValue pfa_force_patches(const SphereGeometry& g, std::span<const PfaPatch> patches, FreeEnergyFn&& free_energy,
                             Separation d) {
  g.validate();
  if (patches.empty()) throw ConfigError("imperfect PFA needs at least one patch");
  double total_radius = 0.0;
  for (const auto& p : patches) {
    if (!(p.radius >= 0.0)) throw ConfigError("patch curvature radius must be non-negative");
    if (!(d.meters() + p.offset > 0.0)) {
      throw DomainError("patch offset " + std::to_string(p.offset / units::um) + " um puts the surface at d + D <= 0");
    }
    total_radius += p.radius;
  }
  if (std::abs(total_radius - g.R) > 1e-9 * g.R) {
    throw ConfigError("patch curvature radii sum to " + std::to_string(total_radius) + " m, lens radius is " +
                      std::to_string(g.R) + " m");
  }
  double force = 0.0;
  for (const auto& p : patches) {
    if (p.radius == 0.0) continue;
    force += 2.0 * constants::pi * p.radius * free_energy(Separation(d.meters() + p.offset));
  }
  return {force};
}

/// The two patches describing a single bubble.
inline std::vector<PfaPatch> bubble_patches(const SphereGeometry& g, const Imperfection& imp) {
  if (!(imp.R1 >= 0.0) || !(imp.R1 <= g.R)) throw ConfigError("imperfection radius R1 must satisfy 0 <= R1 <= R");
  return {{g.R - imp.R1, imp.D}, {imp.R1, 0.0}};
}

template <class FreeEnergyFn>
ForceValue pfa_force_imperfect(const SphereGeometry& g, const Imperfection& imp, FreeEnergyFn&& free_energy,
                               Separation d) {
  g.validate();
  const auto patches = bubble_patches(g, imp);
  return pfa_force_patches(g, std::span<const PfaPatch>(patches), free_energy, d);
}

inline ForceValue pfa_force_imperfect(const SphereGeometry& g, const Imperfection& imp, const PermittivityModel& model,
                                      Separation d, Temperature T, double rel_tol = 1e-7) {
  return pfa_force_imperfect(g, imp, LifshitzFreeEnergy{&model, T, rel_tol}, d);
}

/// Rows of an imperfection file: one row is a single bubble; several rows
/// are explicit patches whose radii must sum to R.
inline std::vector<PfaPatch> imperfection_patches(const SphereGeometry& g, std::span<const Imperfection> imps) {
  if (imps.empty()) throw ConfigError("imperfection list is empty");
  if (imps.size() == 1) return bubble_patches(g, imps.front());
  std::vector<PfaPatch> out;
  for (const auto& i : imps) out.push_back({i.R1, i.D});
  return out;
}

/// CSV `r1_cm,d_offset_um`.
inline std::vector<Imperfection> load_imperfections(const std::string& path) {
  const auto t = csv::read_file(path, {"r1_cm", "d_offset_um"});
  if (t.rows.empty()) throw DataError(path + ": no imperfection rows");
  std::vector<Imperfection> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (!(r[0] > 0.0)) throw DataError(path + ": line " + std::to_string(t.line_numbers[i]) + ": r1_cm must be positive");
    out.push_back({r[0] * units::cm, r[1] * units::um});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Masquerade search: can an imperfect lens described by one model reproduce
// the force of a perfect lens described by another?

struct MasqueradeOptions {
  double r1_frac_min = 0.5;
  double r1_frac_max = 1.0;  // exclusive
  double D_min = -1.0 * units::um;
  double D_max = 1.0 * units::um;
  int grid = 60;
  int refine_iterations = 60;
  double match_threshold = 0.10;
  double no_masquerade_threshold = 0.50;
  double rel_tol = 1e-7;
  double d_min_allowed = 0.5 * units::um;
  double d_max_allowed = 3.0 * units::um;
};

struct MasqueradeResult {
  enum class Verdict { matched, approximate, no_masquerade };

  Imperfection best;
  double max_rel_dev;
  double sum_sq_rel_dev;
  std::vector<double> deviations;  // signed, per grid point
  Verdict verdict;
};

inline std::string to_string(MasqueradeResult::Verdict v) {
  switch (v) {
    case MasqueradeResult::Verdict::matched:
      return "matched";
    case MasqueradeResult::Verdict::approximate:
      return "approximate";
    case MasqueradeResult::Verdict::no_masquerade:
      return "no-masquerade";
  }
  return "?";
}

/// Signed relative deviations of the imperfect candidate from the perfect target.
inline std::vector<double> masquerade_deviations(const SphereGeometry& g, const Imperfection& imp,
                                                 const PermittivityModel& target, const PermittivityModel& candidate,
                                                 std::span<const Separation> d_grid, Temperature T,
                                                 double rel_tol = 1e-7) {
  std::vector<double> dev;
  dev.reserve(d_grid.size());
  for (const auto d : d_grid) {
    const double want = pfa_force(g, target, d, T, rel_tol).newtons;
    const double got = pfa_force_imperfect(g, imp, candidate, d, T, rel_tol).newtons;
    dev.push_back(got / want - 1.0);
  }
  return dev;
}

namespace detail {

struct MasqueradeEval {
  double w;  // R1 / R
  double sse;
};

// For fixed D the candidate force is affine in w = R1/R:
//   f_i(w) = far_i + w (near_i - far_i),  deviation e_i = f_i / t_i - 1,
// so the sum of squared deviations is quadratic in w and minimised in closed form.
inline MasqueradeEval best_weight(std::span<const double> target, std::span<const double> near,
                                  std::span<const double> far, double w_lo, double w_hi) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double a = far[i] / target[i] - 1.0;
    const double b = (near[i] - far[i]) / target[i];
    num -= a * b;
    den += b * b;
  }
  double w = den > 0.0 ? num / den : w_hi;
  w = std::clamp(w, w_lo, w_hi);
  double sse = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double e = (far[i] + w * (near[i] - far[i])) / target[i] - 1.0;
    sse += e * e;
  }
  return {w, sse};
}

}  // namespace detail

/// Coarse scan over D followed by golden-section refinement, with the optimal
/// R1/R (clamped to the search box) solved exactly for each D. Minimises the summed squared
/// relative deviation; reports the maximum deviation at the optimum.
inline MasqueradeResult find_masquerade(const SphereGeometry& g, const PermittivityModel& target,
                                        const PermittivityModel& candidate, std::span<const Separation> d_grid,
                                        Temperature T, const MasqueradeOptions& opt = {}) {
  g.validate();
  if (d_grid.size() < 2) throw ConfigError("masquerade search needs at least two separations");
  for (const auto d : d_grid) {
    if (d.meters() < opt.d_min_allowed * (1 - 1e-12) || d.meters() > opt.d_max_allowed * (1 + 1e-12)) {
      throw DomainError("masquerade search grid must lie within [" + std::to_string(opt.d_min_allowed / units::um) +
                        ", " + std::to_string(opt.d_max_allowed / units::um) + "] um");
    }
  }
  if (opt.grid < 2 || !(opt.r1_frac_min >= 0.0 && opt.r1_frac_min < opt.r1_frac_max && opt.r1_frac_max <= 1.0) ||
      !(opt.D_min < opt.D_max)) {
    throw ConfigError("invalid masquerade search box");
  }

  const std::size_t n = d_grid.size();
  const double two_pi_r = 2.0 * constants::pi * g.R;
  auto cand_force = [&](double d) { return two_pi_r * free_energy_per_area(candidate, {Separation(d), T, opt.rel_tol}).value; };

  std::vector<double> tgt(n);
  std::vector<double> near(n);
  for (std::size_t i = 0; i < n; ++i) {
    tgt[i] = pfa_force(g, target, d_grid[i], T, opt.rel_tol).newtons;
    near[i] = cand_force(d_grid[i].meters());
  }

  // The box excludes R1/R = r1_frac_max itself.
  const double w_lo = opt.r1_frac_min;
  const double w_hi = opt.r1_frac_max - (opt.r1_frac_max == 1.0 ? 1e-9 : 0.0);

  auto evaluate = [&](double D) -> std::optional<detail::MasqueradeEval> {
    for (const auto d : d_grid) {
      if (!(d.meters() + D > 0.0)) return std::nullopt;
    }
    std::vector<double> far(n);
    for (std::size_t i = 0; i < n; ++i) far[i] = cand_force(d_grid[i].meters() + D);
    return detail::best_weight(tgt, near, far, w_lo, w_hi);
  };

  double best_D = 0.0;
  detail::MasqueradeEval best{w_hi, std::numeric_limits<double>::infinity()};
  const double D_step = (opt.D_max - opt.D_min) / (opt.grid - 1);
  for (int k = 0; k < opt.grid; ++k) {
    const double D = opt.D_min + D_step * k;
    const auto e = evaluate(D);
    if (e && e->sse < best.sse) {
      best = *e;
      best_D = D;
    }
  }
  if (!std::isfinite(best.sse)) throw ConfigError("no admissible offset D in the masquerade search box");

  // Golden-section refinement in D on the bracket around the coarse optimum.
  double lo = std::max(opt.D_min, best_D - D_step);
  double hi = std::min(opt.D_max, best_D + D_step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto sse_at = [&](double D) {
    const auto e = evaluate(D);
    return e ? e->sse : std::numeric_limits<double>::infinity();
  };
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = sse_at(x1);
  double f2 = sse_at(x2);
  for (int it = 0; it < opt.refine_iterations && (hi - lo) > 1e-15; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = sse_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = sse_at(x2);
    }
  }
  const double D_ref = f1 < f2 ? x1 : x2;
  if (const auto e = evaluate(D_ref); e && e->sse < best.sse) {
    best = *e;
    best_D = D_ref;
  }

  MasqueradeResult out;
  out.best = {best.w * g.R, best_D};
  out.sum_sq_rel_dev = best.sse;
  out.deviations.resize(n);
  {
    std::vector<double> far(n);
    for (std::size_t i = 0; i < n; ++i) far[i] = cand_force(d_grid[i].meters() + best_D);
    out.max_rel_dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = far[i] + best.w * (near[i] - far[i]);
      out.deviations[i] = f / tgt[i] - 1.0;
      out.max_rel_dev = std::max(out.max_rel_dev, std::abs(out.deviations[i]));
    }
  }
  if (out.max_rel_dev < opt.match_threshold) {
    out.verdict = MasqueradeResult::Verdict::matched;
  } else if (out.max_rel_dev < opt.no_masquerade_threshold) {
    out.verdict = MasqueradeResult::Verdict::approximate;
  } else {
    out.verdict = MasqueradeResult::Verdict::no_masquerade;
  }
  return out;
}

}  // namespace casimir_lab
