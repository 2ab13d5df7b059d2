#pragma once

// Two-parameter fit of total lens-plate force data,
//
//   F(d) = F_C(d) - pi eps0 R V_rms^2 / d - a,
//
// weighted chi^2 and its upper-tail probability.
//
// The model is affine in beta1 = V_rms^2 and beta2 = a, so the weighted
// least-squares problem is solved exactly from the 2x2 normal equations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "casimir_lab/constants.hpp"
#include "casimir_lab/csv.hpp"
#include "casimir_lab/error.hpp"
#include "casimir_lab/quadrature.hpp"

namespace casimir_lab {

struct ForcePoint {
  Separation d;
  double F;      // measured total force [N], attractive < 0
  double sigma;  // one standard deviation [N]
};

struct ForceDataset {
  std::vector<ForcePoint> points;
  std::string label;

  std::size_t size() const noexcept { return points.size(); }

  void validate() const {
    if (points.size() < 3) throw DataError("dataset '" + label + "' needs at least 3 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (!std::isfinite(p.F)) throw DataError("dataset '" + label + "': non-finite force at point " + std::to_string(i + 1));
      if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
        throw DataError("dataset '" + label + "': sigma must be positive at point " + std::to_string(i + 1));
      }
      if (i > 0 && !(p.d > points[i - 1].d)) {
        throw DataError("dataset '" + label + "': separations must be strictly increasing (point " +
                        std::to_string(i + 1) + ")");
      }
    }
  }

  /// Points with dmin <= d <= dmax.
  ForceDataset subset(double dmin, double dmax) const {
    ForceDataset out{{}, label};
    for (const auto& p : points) {
      if (p.d.meters() >= dmin && p.d.meters() <= dmax) out.points.push_back(p);
    }
    return out;
  }
};

struct DatasetLoadOptions {
  /// Force column holds magnitudes of attractive forces; negate on ingestion.
  bool attractive_magnitudes = false;
};

/// CSV `d_um,f_pn,sigma_pn`.
inline ForceDataset parse_dataset(const csv::Table& t, const std::string& label, const DatasetLoadOptions& opt = {}) {
  ForceDataset ds{{}, label};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const auto where = "line " + std::to_string(t.line_numbers[i]) + ": ";
    if (!(r[0] > 0.0)) throw DataError(where + "d_um must be positive");
    if (!(r[2] > 0.0)) throw DataError(where + "sigma_pn must be positive");
    const double f = (opt.attractive_magnitudes ? -r[1] : r[1]) * units::pN;
    ds.points.push_back({Separation::from_um(r[0]), f, r[2] * units::pN});
  }
  ds.validate();
  return ds;
}

inline ForceDataset load_dataset(const std::string& path, const DatasetLoadOptions& opt = {}) {
  const auto t = csv::read_file(path, {"d_um", "f_pn", "sigma_pn"});
  try {
    return parse_dataset(t, path, opt);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

/// Adds a separation-independent instrumental error in quadrature to every point.
inline ForceDataset with_systematic_error(const ForceDataset& data, double sigma_sys) {
  if (!(sigma_sys >= 0.0)) throw DomainError("systematic error must be non-negative");
  ForceDataset out = data;
  for (auto& p : out.points) p.sigma = std::hypot(p.sigma, sigma_sys);
  return out;
}

/// sigma_i / |F_i| in percent; nullopt flags F_i = 0.
inline std::vector<std::optional<double>> relative_errors(const ForceDataset& data) {
  std::vector<std::optional<double>> out;
  out.reserve(data.size());
  for (const auto& p : data.points) {
    if (p.F == 0.0) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(100.0 * p.sigma / std::abs(p.F));
    }
  }
  return out;
}

inline ForceValue total_force_model(Separation d, ForceValue casimir, double V_rms, double a, double R) {
  return {casimir.newtons - constants::pi * constants::eps0 * R * V_rms * V_rms / d.meters() - a};
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma functions.

namespace detail {

// P(a, x) by its power series; converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the Legendre continued fraction (modified Lentz); for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("gamma_q: requires a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_continued_fraction(a, x);
}

/// Probability that chi^2 with nu degrees of freedom exceeds the observed value.
inline double chi2_tail_probability(double chi2, int nu) {
  if (!(chi2 >= 0.0) || !std::isfinite(chi2)) throw DomainError("chi2 must be finite and non-negative");
  if (nu < 1) throw DomainError("degrees of freedom must be >= 1");
  return std::clamp(gamma_q(0.5 * nu, 0.5 * chi2), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

struct FitResult {
  double V_rms;  // [V], negative when the fitted V_rms^2 is negative
  double a;      // [N]
  double V_rms2;  // fitted beta1 [V^2]
  double chi2;
  int nu;
  double chi2_red;
  double Q;
  std::array<std::array<double, 2>, 2> covariance;  // of (V_rms^2 [V^2], a [N])
  bool negative_vrms2 = false;
  std::size_t n_points = 0;
};

/// Weighted chi^2 of the total-force model for given (V_rms^2, a).
inline double chi2_of(const ForceDataset& data, std::span<const double> casimir, double R, double V_rms2, double a) {
  quad::CompensatedSum s;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& p = data.points[i];
    const double model = casimir[i] - constants::pi * constants::eps0 * R * V_rms2 / p.d.meters() - a;
    const double r = (p.F - model) / p.sigma;
    s += r * r;
  }
  return s.value();
}

/// casimir[i] is F_C at data.points[i].d, in newtons.
inline FitResult fit_two_param(const ForceDataset& data, std::span<const double> casimir, double R) {
  data.validate();
  if (casimir.size() != data.size()) throw ConfigError("Casimir curve does not match the dataset length");
  if (!(R > 0.0)) throw DomainError("lens radius must be positive");

  // Residual y_i - x1_i beta1 - x2 beta2 with y = F - F_C, x1 = -pi eps0 R / d, x2 = -1.
  // Columns are rescaled to unit weighted norm before forming the normal equations.
  const std::size_t n = data.size();
  std::vector<double> x1(n);
  std::vector<double> y(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = data.points[i];
    x1[i] = -constants::pi * constants::eps0 * R / p.d.meters();
    y[i] = p.F - casimir[i];
    w[i] = 1.0 / (p.sigma * p.sigma);
  }
  quad::CompensatedSum s11, s12, s22, s1y, s2y;
  for (std::size_t i = 0; i < n; ++i) {
    s11 += w[i] * x1[i] * x1[i];
    s12 += w[i] * x1[i] * -1.0;
    s22 += w[i];
    s1y += w[i] * x1[i] * y[i];
    s2y += w[i] * -1.0 * y[i];
  }
  const double c1 = std::sqrt(s11.value());
  const double c2 = std::sqrt(s22.value());
  const double a11 = 1.0;
  const double a12 = s12.value() / (c1 * c2);
  const double a22 = 1.0;
  const double b1 = s1y.value() / c1;
  const double b2 = s2y.value() / c2;
  const double det = a11 * a22 - a12 * a12;
  if (!(det > 1e-12)) throw ConfigError("degenerate design: the 1/d and constant terms cannot be separated");
  const double z1 = (a22 * b1 - a12 * b2) / det;
  const double z2 = (a11 * b2 - a12 * b1) / det;

  FitResult out{};
  out.V_rms2 = z1 / c1;
  out.a = z2 / c2;
  out.negative_vrms2 = out.V_rms2 < 0.0;
  out.V_rms = out.negative_vrms2 ? -std::sqrt(-out.V_rms2) : std::sqrt(out.V_rms2);
  out.n_points = n;
  out.nu = static_cast<int>(n) - 2;
  out.chi2 = chi2_of(data, casimir, R, out.V_rms2, out.a);
  out.chi2_red = out.chi2 / out.nu;
  out.Q = chi2_tail_probability(out.chi2, out.nu);
  out.covariance = {{{a22 / det / (c1 * c1), -a12 / det / (c1 * c2)}, {-a12 / det / (c1 * c2), a11 / det / (c2 * c2)}}};
  return out;
}

}  // namespace casimir_lab
