#pragma once

// Adaptive Gauss-Kronrod quadrature and compensated summation.
//
// The adaptive driver keeps all subintervals in a max-heap ordered by error
// estimate and bisects the worst one until the global tolerance is met, the
// interval budget is exhausted, or the intervals become too short to split.
// Evaluation order depends only on the integrand, so results are reproducible.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace casimir_lab::quad {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

struct Tolerance {
  double abs = 0.0;
  double rel = 1e-10;
  std::size_t max_intervals = 4000;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const noexcept { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  kronrod *= half;
  gauss *= half;
  double err = std::abs(kronrod - gauss);
  // Round-off floor: nothing below a few ulps of the panel magnitude is resolvable.
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * std::abs(kronrod));
  return {a, b, kronrod, err};
}

}  // namespace detail

/// Integrates f over the finite interval [a, b].
template <class F>
Result integrate(F&& f, double a, double b, const Tolerance& tol = {}) {
  Result out;
  if (a == b) return out;
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gk15(f, a, b));
  out.evaluations = 15;
  double total = heap.top().value;
  double error = heap.top().error;
  while (error > std::max(tol.abs, tol.rel * std::abs(total))) {
    if (heap.size() >= tol.max_intervals) {
      out.converged = false;
      break;
    }
    const detail::Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      out.converged = false;
      break;
    }
    heap.pop();
    const detail::Segment left = detail::gk15(f, worst.a, mid);
    const detail::Segment right = detail::gk15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the final segments so the reported value carries no drift
  // from the incremental updates above.
  CompensatedSum v;
  CompensatedSum e;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  out.value = v.value();
  out.error = e.value();
  return out;
}

/// Integrates f over [a, b] split at the given interior breakpoints.
template <class F>
Result integrate(F&& f, double a, double b, std::vector<double> breaks, const Tolerance& tol) {
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double x) { return !(x > a && x < b); }),
               breaks.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  breaks.insert(breaks.begin(), a);
  breaks.push_back(b);
  Result out;
  CompensatedSum v;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const Result part = integrate(f, breaks[i], breaks[i + 1], tol);
    v += part.value;
    out.error += part.error;
    out.evaluations += part.evaluations;
    out.converged = out.converged && part.converged;
  }
  out.value = v.value();
  return out;
}

/// Integrates a single-signed integrand that decays at least exponentially
/// over [a, inf). The half line is cut into panels of doubling width starting
/// at `scale`; panels are added until one contributes less than a small
/// fraction of the relative tolerance.
template <class F>
Result integrate_to_infinity(F&& f, double a, double scale, const Tolerance& tol = {}) {
  Result out;
  CompensatedSum v;
  double lo = a;
  double width = scale;
  for (int panel = 0; panel < 80; ++panel) {
    const double hi = lo + width;
    // Once the bulk is known, later panels only need absolute accuracy relative to it.
    Tolerance panel_tol = tol;
    if (panel > 0) panel_tol.abs = std::max(tol.abs, 0.1 * tol.rel * std::abs(v.value()));
    const Result part = integrate(f, lo, hi, panel_tol);
    v += part.value;
    out.error += part.error;
    out.evaluations += part.evaluations;
    out.converged = out.converged && part.converged;
    const double running = std::abs(v.value());
    if (panel >= 2 && std::abs(part.value) <= 1e-3 * tol.rel * running) {
      out.value = v.value();
      // The remaining tail is bounded by the last panel for a decaying integrand.
      out.error += std::abs(part.value);
      return out;
    }
    if (panel >= 2 && running == 0.0 && part.value == 0.0) {
      out.value = 0.0;
      return out;
    }
    lo = hi;
    width *= 2.0;
  }
  out.value = v.value();
  out.converged = false;
  return out;
}

}  // namespace casimir_lab::quad
