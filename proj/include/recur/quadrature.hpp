#pragma once

// Adaptive quadrature for integrands that blow up at the ends of the range.
//
// Regular segments use a 7/15-point Gauss-Kronrod pair. Segments that touch an
// endpoint flagged as singular use tanh-sinh (double exponential) nodes, which
// cluster doubly-exponentially at the ends and absorb |x-c|^(-a) blow-ups.
// Segments are bisected globally by largest error until the relative
// tolerance is met; the final sum is taken in left-to-right order so results
// do not depend on refinement history.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "recur/expression.hpp"

namespace recur {

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  std::size_t function_evals = 0;
};

enum class Endpoint : unsigned { none = 0, left = 1, right = 2, both = 3 };

constexpr Endpoint operator|(Endpoint a, Endpoint b) {
  return static_cast<Endpoint>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr bool has(Endpoint flags, Endpoint bit) {
  return (static_cast<unsigned>(flags) & static_cast<unsigned>(bit)) != 0;
}

namespace detail {

struct SegmentEstimate {
  double value = 0.0;
  double error = 0.0;
  std::size_t evals = 0;
};

inline constexpr double kronrod_x[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kronrod_w[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gauss_w[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
double checked_call(F& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) throw EvaluationError("non-finite integrand", x);
  return y;
}

template <class F>
SegmentEstimate gauss_kronrod(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = checked_call(f, center);
  double kronrod = fc * kronrod_w[7];
  double gauss = fc * gauss_w[3];
  double abs_sum = std::fabs(kronrod);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kronrod_x[j];
    fv1[j] = checked_call(f, center - dx);
    fv2[j] = checked_call(f, center + dx);
    kronrod += kronrod_w[j] * (fv1[j] + fv2[j]);
    abs_sum += kronrod_w[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
    if (j % 2 == 1) gauss += gauss_w[j / 2] * (fv1[j] + fv2[j]);
  }
  const double mean = 0.5 * kronrod;
  double asc = kronrod_w[7] * std::fabs(fc - mean);
  for (int j = 0; j < 7; ++j)
    asc += kronrod_w[j] * (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));

  SegmentEstimate out;
  out.value = kronrod * half;
  out.evals = 15;
  double err = std::fabs((kronrod - gauss) * half);
  asc *= std::fabs(half);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum * std::fabs(half);
  out.error = std::max(err, roundoff);
  return out;
}

// Integral of f over the last `delta` before a singular endpoint that is not
// at 0. Closer than that, x = end + t cannot resolve t to better than about
// 2^-30 relative accuracy, so f is modelled as C t^p (1 + c t) from its values
// at t = delta, 2 delta, 4 delta.
template <class F>
SegmentEstimate endpoint_tail(F& f, double end, double toward, double delta) {
  SegmentEstimate out;
  const double dir = toward > end ? 1.0 : -1.0;
  double t[3], v[3];
  for (int k = 0; k < 3; ++k) {
    const double x = end + dir * std::ldexp(delta, k);
    t[k] = std::fabs(x - end);
    v[k] = checked_call(f, x);
  }
  out.evals = 3;
  const bool same_sign = (v[0] > 0 && v[1] > 0 && v[2] > 0) || (v[0] < 0 && v[1] < 0 && v[2] < 0);
  if (!same_sign) {
    out.value = v[0] * t[0];
    out.error = std::fabs(out.value);
    return out;
  }
  const double p1 = std::log(v[1] / v[0]) / std::log(t[1] / t[0]);
  const double p2 = std::log(v[2] / v[1]) / std::log(t[2] / t[1]);
  const double p = 2.0 * p1 - p2;
  if (!(p > -1.0)) {
    out.value = v[0] * t[0];
    out.error = std::numeric_limits<double>::infinity();
    return out;
  }
  const double ct = v[1] / v[0] * std::pow(t[0] / t[1], p) - 1.0;  // c * t[0], first order
  const double scale = v[0] / (1.0 + ct);                          // C t[0]^p
  out.value = scale * t[0] * (1.0 / (1.0 + p) + ct / (2.0 + p));
  // Neglected second-order term, plus rounding of the node positions just
  // beyond delta (observed well below a quarter of p * eps * |end| / delta).
  out.error = std::fabs(scale * t[0]) * (ct * ct + std::fabs(p1 - p2) * std::fabs(p1 - p2)) +
              (0.25 * std::fabs(p) * std::numeric_limits<double>::epsilon() * std::fabs(end) / t[0] + 1e-15) *
                  std::fabs(out.value);
  return out;
}

// Tanh-sinh on [lo, hi]. Node offsets from the nearer end are computed as
// half * (1 - tanh|u|) directly so that points near a singular end keep their
// relative accuracy.
template <class F>
SegmentEstimate tanh_sinh(F& f, double lo, double hi, double tol, int max_level, bool sing_lo = false,
                          bool sing_hi = false) {
  constexpr double t_max = 6.0;
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double eps = std::numeric_limits<double>::epsilon();
  SegmentEstimate out;

  SegmentEstimate tails;
  auto cut = [&](double end, double toward) {
    const double delta = std::ldexp(std::fabs(end), -22);
    if (delta == 0.0 || std::fabs(toward - end) < 64.0 * delta) return end;
    const auto t = endpoint_tail(f, end, toward, delta);
    tails.value += t.value;
    tails.error += t.error;
    tails.evals += t.evals;
    return toward > end ? end + delta : end - delta;
  };
  const double lo_in = sing_lo ? cut(lo, hi) : lo;
  const double hi_in = sing_hi ? cut(hi, lo) : hi;
  // f is finite at a cut end, so nodes that round onto it are kept.
  const bool keep_lo = lo_in != lo, keep_hi = hi_in != hi;
  lo = lo_in;
  hi = hi_in;
  const double half = 0.5 * (hi - lo);

  auto term = [&](double t) -> double {
    const double u = half_pi * std::sinh(t);
    const double au = std::fabs(u);
    const double eu = std::exp(au);
    if (!std::isfinite(eu)) return 0.0;
    const double offset = half * (2.0 / (eu * eu + 1.0));
    const double end = t < 0.0 ? lo : hi;
    const double x = t < 0.0 ? lo + offset : hi - offset;
    if (t < 0.0 ? keep_lo : keep_hi) {
      if (!(x >= lo && x <= hi)) return 0.0;
    } else {
      if (offset == 0.0 || offset < 8.0 * eps * std::fabs(end)) return 0.0;
      if (!(x > lo && x < hi)) return 0.0;
    }
    const double c = 0.5 * (eu + 1.0 / eu);
    const double w = half_pi * std::cosh(t) / (c * c);
    if (w == 0.0) return 0.0;
    ++out.evals;
    return w * checked_call(f, x);
  };

  double h = 1.0;
  double sum = term(0.0);
  for (double t = h; t <= t_max; t += h) sum += term(t) + term(-t);
  double estimate = half * h * sum;
  double previous = estimate;
  double err = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double fresh = 0.0;
    for (double t = h; t <= t_max; t += 2.0 * h) fresh += term(t) + term(-t);
    sum += fresh;
    previous = estimate;
    estimate = half * h * sum;
    err = std::fabs(estimate - previous);
    if (level >= 3 && err <= 0.1 * tol * std::fabs(estimate)) break;
  }
  out.value = estimate + tails.value;
  out.error = std::max(err, 50.0 * eps * std::fabs(estimate)) + tails.error;
  out.evals += tails.evals;
  return out;
}

}  // namespace detail

/// Integrates f over [a, b] to relative tolerance tol.
///
/// Endpoints flagged in `flags` may be singular; they are never evaluated.
/// When the segment budget runs out the best estimate is returned with
/// converged = false. A non-finite value at any node throws EvaluationError.
template <class F>
IntegralResult integrate(F&& f, double a, double b, double tol, Endpoint flags = Endpoint::none,
                         std::size_t max_segments = 4000) {
  if (!(std::isfinite(a) && std::isfinite(b))) throw std::invalid_argument("integrate: infinite limits");
  if (a > b) throw std::invalid_argument("integrate: lower limit exceeds upper limit");
  if (!(tol > 0.0)) throw std::invalid_argument("integrate: tolerance must be positive");
  IntegralResult result;
  if (a == b) {
    result.converged = true;
    return result;
  }

  struct Segment {
    double lo, hi;
    detail::SegmentEstimate est;
  };

  constexpr int max_level = 9;
  auto estimate = [&](double lo, double hi) {
    const bool sing_lo = lo == a && has(flags, Endpoint::left);
    const bool sing_hi = hi == b && has(flags, Endpoint::right);
    if (sing_lo || sing_hi) return detail::tanh_sinh(f, lo, hi, tol, max_level, sing_lo, sing_hi);
    return detail::gauss_kronrod(f, lo, hi);
  };

  std::vector<Segment> segments;
  segments.push_back({a, b, estimate(a, b)});
  result.function_evals = segments.back().est.evals;

  auto totals = [&]() {
    std::sort(segments.begin(), segments.end(),
              [](const Segment& x, const Segment& y) { return x.lo < y.lo; });
    double value = 0.0, error = 0.0;
    for (const auto& s : segments) {
      value += s.est.value;
      error += s.est.error;
    }
    return std::pair{value, error};
  };

  double running_value = segments.back().est.value;
  double running_error = segments.back().est.error;
  while (true) {
    if (running_error <= tol * std::fabs(running_value) || segments.size() >= max_segments) {
      auto [value, error] = totals();
      result.value = value;
      result.error_estimate = error;
      if (error <= tol * std::fabs(value)) {
        result.converged = true;
        return result;
      }
      if (segments.size() >= max_segments) return result;
    }

    auto worst = std::max_element(segments.begin(), segments.end(),
                                  [](const Segment& x, const Segment& y) {
                                    return x.est.error < y.est.error;
                                  });
    const double lo = worst->lo, hi = worst->hi;
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) {  // cannot split further
      auto [value, error] = totals();
      result.value = value;
      result.error_estimate = error;
      return result;
    }
    running_value -= worst->est.value;
    running_error -= worst->est.error;
    segments.erase(worst);
    segments.push_back({lo, mid, estimate(lo, mid)});
    segments.push_back({mid, hi, estimate(mid, hi)});
    for (std::size_t k = segments.size() - 2; k < segments.size(); ++k) {
      running_value += segments[k].est.value;
      running_error += segments[k].est.error;
      result.function_evals += segments[k].est.evals;
    }
  }
}

enum class Side { left, right };
enum class Integrability { integrable, non_integrable, undetermined };

inline const char* to_string(Integrability i) {
  switch (i) {
    case Integrability::integrable: return "integrable";
    case Integrability::non_integrable: return "non-integrable";
    case Integrability::undetermined: return "undetermined";
  }
  return "undetermined";
}

struct LocalIntegrability {
  Integrability status = Integrability::undetermined;
  double value = 0.0;           // extrapolated integral over the h0-neighborhood
  double exponent = 0.0;        // fitted blow-up exponent beta in f ~ |s - c|^(-beta)
  double fit_residual = 0.0;    // rms residual of the log-increment fit
  std::vector<double> partials; // I_k over (c + h_k, c + h0), mirrored for the left side
};

struct LocalIntegrabilityOptions {
  double exponent_margin = 0.02;  // integrable iff fitted beta < 1 - margin
  double growth_threshold = 8.0;  // non-integrable also needs I_K >= threshold * I_1
  double residual_limit = 0.1;    // larger log-fit residuals mean oscillation
};

/// Decides whether f is integrable on the one-sided punctured neighborhood
/// (c, c + h0) (or (c - h0, c) for Side::left).
///
/// Shells (c + h0 2^-k, c + h0 2^-(k-1)) are integrated for k = 1..K; their
/// logarithms are fit linearly in k. For f ~ s^-beta the shells shrink by
/// 2^(beta - 1) per step, so the fitted slope estimates beta.
template <class F>
LocalIntegrability local_integrability(F&& f, double c, Side side, double h0, double tol,
                                       const LocalIntegrabilityOptions& opt = {}) {
  if (!(h0 > 0.0)) throw std::invalid_argument("local_integrability: h0 must be positive");
  LocalIntegrability out;
  const double eps = std::numeric_limits<double>::epsilon();
  // c + t must resolve t to about 1e-10 relative accuracy
  const double floor_h = std::max(1e6 * eps * std::fabs(c), 1e-280);
  int shells = static_cast<int>(std::floor(std::log2(h0 / floor_h)));
  shells = std::clamp(shells, 8, 60);

  const double dir = side == Side::right ? 1.0 : -1.0;
  auto g = [&](double t) { return f(c + dir * t); };

  std::vector<double> increments;
  double partial = 0.0;
  double outer = h0;
  try {
    for (int k = 1; k <= shells; ++k) {
      const double inner = h0 * std::ldexp(1.0, -k);
      const IntegralResult r = integrate(g, inner, outer, tol);
      if (!r.converged || !(r.value > 0.0)) return out;
      increments.push_back(r.value);
      partial += r.value;
      out.partials.push_back(partial);
      outer = inner;
    }
  } catch (const EvaluationError&) {
    return out;
  }

  const std::size_t m = std::min<std::size_t>(16, increments.size() / 2);
  const std::size_t first = increments.size() - m;
  double sk = 0, sy = 0, skk = 0, sky = 0;
  for (std::size_t i = first; i < increments.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double y = std::log2(increments[i]);
    sk += k;
    sy += y;
    skk += k * k;
    sky += k * y;
  }
  const double md = static_cast<double>(m);
  const double slope = (md * sky - sk * sy) / (md * skk - sk * sk);
  const double intercept = (sy - slope * sk) / md;
  double rss = 0.0;
  for (std::size_t i = first; i < increments.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double r = std::log2(increments[i]) - (intercept + slope * k);
    rss += r * r;
  }
  out.fit_residual = std::sqrt(rss / md);
  out.exponent = 1.0 + slope;
  if (out.fit_residual > opt.residual_limit) return out;

  if (out.exponent < 1.0 - opt.exponent_margin) {
    const double ratio = std::exp2(slope);
    out.value = partial + increments.back() * ratio / (1.0 - ratio);
    out.status = Integrability::integrable;
  } else if (partial >= opt.growth_threshold * out.partials.front()) {
    out.status = Integrability::non_integrable;
  }
  return out;
}

}  // namespace recur
