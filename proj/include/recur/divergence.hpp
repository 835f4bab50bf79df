#pragma once

// Diagnosis of whether a sampled sequence a_n tends to infinity.
//
// The tail of the sequence is fit by least squares to alpha + beta * g_p(n)
// where g_p(n) = (n^p - 1)/p and g_0(n) = log n. This single family covers
// logarithmic growth (p = 0), power growth (p > 0) and convergence to a
// constant (p < 0). The fitted model is then extrapolated from the last
// sample n_N to divergence_floor * n_N: the sequence is diagnosed divergent
// when the predicted further growth is at least as large as the growth seen
// over the whole sample range. All criteria are invariant under positive
// rescaling of the sequence.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace recur {

enum class DivergenceKind { diverges_to_infinity, bounded, undetermined };
enum class GrowthModel { logarithmic, power, constant_tail };

inline const char* to_string(DivergenceKind k) {
  switch (k) {
    case DivergenceKind::diverges_to_infinity: return "DivergesToInfinity";
    case DivergenceKind::bounded: return "Bounded";
    case DivergenceKind::undetermined: return "Undetermined";
  }
  return "Undetermined";
}

inline const char* to_string(GrowthModel m) {
  switch (m) {
    case GrowthModel::logarithmic: return "logarithmic";
    case GrowthModel::power: return "power";
    case GrowthModel::constant_tail: return "constant-tail";
  }
  return "constant-tail";
}

struct SequencePoint {
  double n = 0.0;
  double value = 0.0;
  bool operator==(const SequencePoint&) const = default;
};

struct DivergenceOptions {
  double divergence_floor = 1e3;  // extrapolation horizon factor
  double fit_tolerance = 1e-2;    // relative rms residual
  double growth_ratio = 1.0;      // predicted / observed growth needed for divergence
  double log_band = 0.05;         // |p| below this is reported as logarithmic
  std::size_t min_samples = 8;
  bool operator==(const DivergenceOptions&) const = default;
};

struct DivergenceVerdict {
  DivergenceKind kind = DivergenceKind::undetermined;
  GrowthModel model = GrowthModel::constant_tail;
  double exponent = 0.0;     // fitted p
  double offset = 0.0;       // alpha
  double scale = 0.0;        // beta
  double residual = 0.0;     // rms residual / sample range
  double growth_ratio = 0.0; // extrapolated growth / observed growth
  double divergence_floor = 0.0;
  double fit_tolerance = 0.0;
  std::string reason;
  std::vector<SequencePoint> samples;

  bool operator==(const DivergenceVerdict&) const = default;
};

namespace detail {

inline double box_cox(double n, double p) {
  if (std::fabs(p) < 1e-12) return std::log(n);
  return std::expm1(p * std::log(n)) / p;
}

struct LinearFit {
  double alpha = 0.0, beta = 0.0, rss = std::numeric_limits<double>::infinity();
};

inline LinearFit fit_box_cox(const std::vector<SequencePoint>& s, std::size_t first, double p) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(s.size() - first);
  for (std::size_t i = first; i < s.size(); ++i) {
    const double x = box_cox(s[i].n, p);
    sx += x;
    sy += s[i].value;
    sxx += x * x;
    sxy += x * s[i].value;
  }
  LinearFit f;
  const double det = m * sxx - sx * sx;
  if (!(std::fabs(det) > 0.0)) return f;
  f.beta = (m * sxy - sx * sy) / det;
  f.alpha = (sy - f.beta * sx) / m;
  double rss = 0.0;
  for (std::size_t i = first; i < s.size(); ++i) {
    const double r = s[i].value - (f.alpha + f.beta * box_cox(s[i].n, p));
    rss += r * r;
  }
  f.rss = rss;
  return f;
}

}  // namespace detail

/// Diagnoses a_n -> infinity from samples (n, a_n), n increasing.
inline DivergenceVerdict divergence_diagnose(std::vector<SequencePoint> samples,
                                             const DivergenceOptions& opt = {}) {
  DivergenceVerdict v;
  v.divergence_floor = opt.divergence_floor;
  v.fit_tolerance = opt.fit_tolerance;
  std::sort(samples.begin(), samples.end(),
            [](const SequencePoint& a, const SequencePoint& b) { return a.n < b.n; });
  v.samples = samples;

  if (samples.size() < opt.min_samples) {
    v.reason = "fewer than " + std::to_string(opt.min_samples) + " samples";
    return v;
  }
  for (const auto& s : samples) {
    if (!std::isfinite(s.value) || !(s.n > 0.0)) {
      v.reason = "non-finite sample or non-positive index";
      return v;
    }
  }

  double lo = samples.front().value, hi = lo;
  for (const auto& s : samples) {
    lo = std::min(lo, s.value);
    hi = std::max(hi, s.value);
  }
  const double range = hi - lo;
  const double scale_ref = std::max(std::fabs(lo), std::fabs(hi));
  if (range <= 1e-13 * scale_ref || range == 0.0) {
    v.kind = DivergenceKind::bounded;
    v.model = GrowthModel::constant_tail;
    v.offset = samples.back().value;
    v.reason = "constant sequence";
    return v;
  }

  // Monotonicity up to quadrature-level noise.
  const double noise = 1e-9 * range;
  bool nondecreasing = true, nonincreasing = true;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double step = samples[i].value - samples[i - 1].value;
    if (step < -noise) nondecreasing = false;
    if (step > noise) nonincreasing = false;
  }
  if (!nondecreasing && !nonincreasing) {
    v.reason = "non-monotone samples";
    return v;
  }

  const std::size_t first = samples.size() / 4;
  double best_p = 0.0;
  detail::LinearFit best;
  for (int i = -400; i <= 400; ++i) {
    const double p = 0.01 * i;
    const auto f = detail::fit_box_cox(samples, first, p);
    if (f.rss < best.rss) {
      best = f;
      best_p = p;
    }
  }
  // golden-section refinement around the grid optimum
  double a = best_p - 0.01, b = best_p + 0.01;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 40; ++it) {
    const double c = b - gr * (b - a), d = a + gr * (b - a);
    if (detail::fit_box_cox(samples, first, c).rss < detail::fit_box_cox(samples, first, d).rss)
      b = d;
    else
      a = c;
  }
  const double refined = 0.5 * (a + b);
  if (const auto f = detail::fit_box_cox(samples, first, refined); f.rss <= best.rss) {
    best = f;
    best_p = refined;
  }

  const double m = static_cast<double>(samples.size() - first);
  v.exponent = best_p;
  v.offset = best.alpha;
  v.scale = best.beta;
  v.residual = std::sqrt(best.rss / m) / range;
  if (std::fabs(best_p) <= opt.log_band)
    v.model = GrowthModel::logarithmic;
  else if (best_p > 0.0)
    v.model = GrowthModel::power;
  else
    v.model = GrowthModel::constant_tail;

  if (nonincreasing) {
    v.kind = DivergenceKind::bounded;
    v.reason = "non-increasing sequence";
    return v;
  }
  if (v.residual > opt.fit_tolerance) {
    v.reason = "fit residual above tolerance";
    return v;
  }
  if (!(best.beta > 0.0)) {
    v.kind = DivergenceKind::bounded;
    v.reason = "fitted growth is not positive";
    return v;
  }

  const double n_last = samples.back().n;
  const double observed = samples.back().value - samples.front().value;
  const double predicted = best.beta * (detail::box_cox(opt.divergence_floor * n_last, best_p) -
                                        detail::box_cox(n_last, best_p));
  v.growth_ratio = predicted / observed;
  if (v.growth_ratio >= opt.growth_ratio) {
    v.kind = DivergenceKind::diverges_to_infinity;
    v.reason = "extrapolated growth exceeds observed growth";
  } else {
    v.kind = DivergenceKind::bounded;
    v.reason = "extrapolated growth saturates";
  }
  return v;
}

}  // namespace recur
