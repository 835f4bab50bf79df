#pragma once

// Detection of the Hamza set U (the largest open set on which 1/(sigma phi) is
// locally integrable) and classification of its interval structure into the
// cases of the one-dimensional recurrence criteria.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "recur/problem.hpp"
#include "recur/quadrature.hpp"

namespace recur {

enum class CaseTag { none, line_i, line_ii, line_iii, line_iv, line_v, half_i, half_ii };

inline const char* to_string(CaseTag t) {
  switch (t) {
    case CaseTag::none: return "none";
    case CaseTag::line_i: return "line-i";
    case CaseTag::line_ii: return "line-ii";
    case CaseTag::line_iii: return "line-iii";
    case CaseTag::line_iv: return "line-iv";
    case CaseTag::line_v: return "line-v";
    case CaseTag::half_i: return "half-i";
    case CaseTag::half_ii: return "half-ii";
  }
  return "none";
}

inline std::optional<CaseTag> case_tag_from_string(const std::string& s) {
  for (auto t : {CaseTag::none, CaseTag::line_i, CaseTag::line_ii, CaseTag::line_iii,
                 CaseTag::line_iv, CaseTag::line_v, CaseTag::half_i, CaseTag::half_ii})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Open interval; endpoints may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

enum class TailKind { open, accumulating };

/// What U looks like beyond the search window on one side: either an
/// unbounded interval, or intervals between the points of a periodic pattern.
struct Tail {
  TailKind kind = TailKind::open;
  std::optional<PointPattern> pattern;
  bool operator==(const Tail&) const = default;
};

/// Points x_1 < x_2 < ... (or x_0 > x_-1 > ...) bounding the intervals of an
/// accumulating tail.
struct LatticeAnchor {
  double start = 0.0;   // x_1 for the right tail, x_0 for the left tail
  double spacing = 1.0;
  bool operator==(const LatticeAnchor&) const = default;
};

struct AnchorData {
  double a = 0.0;  // (-inf, a) is a component of U (line-ii, line-v)
  double b = 0.0;  // (b, inf) is a component of U (line-ii, line-iv, half-i)
  std::optional<LatticeAnchor> right;  // x_n = start + (n - 1) spacing, n >= 1
  std::optional<LatticeAnchor> left;   // x_-n = start - n spacing, n >= 0

  double x_right(int n) const { return right->start + (n - 1) * right->spacing; }
  double x_left(int n) const { return left->start - n * left->spacing; }

  bool operator==(const AnchorData&) const = default;
};

struct IntervalDecomposition {
  DomainKind domain = DomainKind::line;
  std::vector<Interval> intervals;       // ordered, disjoint; union is U inside the window
  std::vector<double> complement_points; // detected points of R \ U inside the window
  std::vector<double> ambiguous_points;  // excluded because integrability was undetermined
  Tail left_tail;
  Tail right_tail;
  CaseTag case_tag = CaseTag::none;
  AnchorData anchors;
  std::vector<std::string> notes;

  bool operator==(const IntervalDecomposition&) const = default;
};

class ClassificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DetectionOptions {
  double window_lo = -10.0;
  double window_hi = 10.0;
  double tol = 1e-8;
  double h0 = 0.5;
  std::size_t positivity_samples = 2048;
};

namespace detail {

inline bool on_pattern(double x, const PointPattern& p) { return p.contains(x); }

}  // namespace detail

/// Generic detector: U for an integrand f on the line or half-line, given the
/// candidate singular points and point patterns f may have.
///
/// Each candidate inside the window is tested on both sides with
/// local_integrability. Candidates found integrable are absorbed into U;
/// undetermined ones are excluded (U only shrinks, which keeps the sufficient
/// criteria sound). A pattern is absorbed only if all its points in the window
/// are integrable; otherwise every pattern point is excluded and the pattern
/// continues as an accumulating tail beyond the window on the sides it extends
/// to. Finite candidates outside the window cannot be tested and are excluded.
inline IntervalDecomposition detect_intervals(const std::function<double(double)>& f,
                                              const std::function<double(double)>& positivity,
                                              const Singularities& candidates, DomainKind domain,
                                              const DetectionOptions& opt) {
  if (!(opt.window_lo < opt.window_hi)) throw SpecError("search window must be nonempty");
  if (!(opt.tol > 0.0)) throw SpecError("tolerance must be positive");
  const bool half = domain == DomainKind::half_line;
  const double lo = half ? 0.0 : opt.window_lo;
  const double hi = opt.window_hi;
  if (!(hi > lo)) throw SpecError("search window does not meet the domain");

  IntervalDecomposition dec;
  dec.domain = domain;

  // Positivity audit on midpoints of a uniform grid.
  for (std::size_t i = 0; i < opt.positivity_samples; ++i) {
    const double x = lo + (hi - lo) * (static_cast<double>(i) + 0.5) /
                              static_cast<double>(opt.positivity_samples);
    if (candidates.contains(x)) continue;
    double v;
    try {
      v = positivity(x);
    } catch (const EvaluationError& e) {
      throw SpecError(std::string("coefficient evaluation failed during positivity audit: ") +
                      e.what());
    }
    if (!(v > 0.0) || !std::isfinite(v))
      throw SpecError("sigma*phi is not strictly positive and finite at x=" + std::to_string(x));
  }

  // Gather the candidate points inside the window, remembering which come from patterns.
  struct Candidate {
    double x;
    int pattern;  // -1 for finite points
  };
  std::vector<Candidate> cands;
  auto inside = [&](double x) { return half ? (x > 0.0 && x <= hi) : (x >= lo && x <= hi); };
  for (double p : candidates.points) {
    if (half && p <= 0.0) continue;
    if (inside(p))
      cands.push_back({p, -1});
    else
      dec.ambiguous_points.push_back(p);
  }
  for (std::size_t k = 0; k < candidates.patterns.size(); ++k)
    for (double p : candidates.patterns[k].points_in(lo, hi))
      if (inside(p)) cands.push_back({p, static_cast<int>(k)});
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.x < b.x; });
  {
    std::vector<Candidate> unique;
    for (const auto& c : cands)
      if (unique.empty() || std::fabs(unique.back().x - c.x) > 1e-12 * std::max(1.0, std::fabs(c.x)))
        unique.push_back(c);
      else if (c.pattern >= 0)
        unique.back().pattern = c.pattern;
    cands = std::move(unique);
  }
  if (half && !dec.ambiguous_points.empty())
    dec.notes.push_back("declared singular points beyond the window were excluded from U");
  if (!half && !dec.ambiguous_points.empty())
    dec.notes.push_back("declared singular points outside the window were excluded from U");

  std::vector<Integrability> status(cands.size(), Integrability::undetermined);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const double x = cands[i].x;
    double gap = opt.h0;
    if (i > 0) gap = std::min(gap, 0.45 * (x - cands[i - 1].x));
    if (i + 1 < cands.size()) gap = std::min(gap, 0.45 * (cands[i + 1].x - x));
    const double left_gap = half ? std::min(gap, 0.45 * x) : gap;
    const auto r = local_integrability(f, x, Side::right, gap, opt.tol);
    const auto l = local_integrability(f, x, Side::left, left_gap, opt.tol);
    if (r.status == Integrability::integrable && l.status == Integrability::integrable)
      status[i] = Integrability::integrable;
    else if (r.status == Integrability::non_integrable || l.status == Integrability::non_integrable)
      status[i] = Integrability::non_integrable;
    else
      status[i] = Integrability::undetermined;
  }

  // Pattern-level decision.
  std::vector<bool> pattern_excluded(candidates.patterns.size(), false);
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (cands[i].pattern >= 0 && status[i] != Integrability::integrable)
      pattern_excluded[static_cast<std::size_t>(cands[i].pattern)] = true;
  for (std::size_t k = 0; k < candidates.patterns.size(); ++k) {
    bool any_in_window = false;
    for (const auto& c : cands)
      if (c.pattern == static_cast<int>(k)) any_in_window = true;
    if (!any_in_window) {
      // Nothing to test: keep the pattern conservatively excluded.
      pattern_excluded[k] = true;
      dec.notes.push_back("point pattern has no points in the window; treated as excluded");
    }
  }

  std::vector<double> excluded;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const bool from_excluded_pattern =
        cands[i].pattern >= 0 && pattern_excluded[static_cast<std::size_t>(cands[i].pattern)];
    if (status[i] == Integrability::non_integrable || from_excluded_pattern) {
      excluded.push_back(cands[i].x);
    } else if (status[i] == Integrability::undetermined) {
      excluded.push_back(cands[i].x);
      dec.ambiguous_points.push_back(cands[i].x);
    }
  }
  std::sort(dec.ambiguous_points.begin(), dec.ambiguous_points.end());
  dec.complement_points = excluded;

  // Tails.
  for (std::size_t k = 0; k < candidates.patterns.size(); ++k) {
    if (!pattern_excluded[k]) continue;
    const auto& p = candidates.patterns[k];
    if (p.extends_right()) {
      if (dec.right_tail.kind == TailKind::accumulating)
        throw SpecError("more than one point pattern accumulates at +infinity");
      dec.right_tail = {TailKind::accumulating, p};
    }
    if (p.extends_left() && !half) {
      if (dec.left_tail.kind == TailKind::accumulating)
        throw SpecError("more than one point pattern accumulates at -infinity");
      dec.left_tail = {TailKind::accumulating, p};
    }
  }

  // Intervals inside the window.
  std::vector<double> cuts = excluded;
  double start = half ? 0.0 : -inf;
  if (dec.left_tail.kind == TailKind::accumulating) {
    if (cuts.empty()) throw ClassificationError("accumulating tail without points in window");
    start = cuts.front();
    cuts.erase(cuts.begin());
  }
  double end = inf;
  if (dec.right_tail.kind == TailKind::accumulating) {
    if (cuts.empty() && dec.left_tail.kind != TailKind::accumulating)
      throw ClassificationError("accumulating tail without points in window");
    if (!cuts.empty()) {
      end = cuts.back();
      cuts.pop_back();
    } else {
      end = start;
    }
  }
  double cursor = start;
  for (double c : cuts) {
    if (c > cursor) dec.intervals.push_back({cursor, c});
    cursor = c;
  }
  if (end > cursor) dec.intervals.push_back({cursor, end});
  return dec;
}

namespace detail {

// Largest pattern point <= x (respecting extent), or nullopt.
inline std::optional<double> pattern_floor(const PointPattern& p, double x) {
  double k = std::floor((x - p.origin) / p.spacing + 1e-12);
  if (p.extent == PatternExtent::left) k = std::min(k, 0.0);
  if (p.extent == PatternExtent::right && k < 0.0) return std::nullopt;
  return p.origin + k * p.spacing;
}

// Smallest pattern point > x (respecting extent), or nullopt.
inline std::optional<double> pattern_above(const PointPattern& p, double x) {
  double k = std::floor((x - p.origin) / p.spacing + 1e-12) + 1.0;
  if (p.extent == PatternExtent::right) k = std::max(k, 0.0);
  if (p.extent == PatternExtent::left && k > 0.0) return std::nullopt;
  return p.origin + k * p.spacing;
}

}  // namespace detail

/// Tags the decomposition with one of the seven cases and fills the anchor
/// data the tagged criterion needs. Depends only on the set of intervals and
/// the tails, not on the order intervals are listed in.
inline IntervalDecomposition classify_case(IntervalDecomposition dec) {
  std::sort(dec.intervals.begin(), dec.intervals.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  const bool accumulate_left = dec.left_tail.kind == TailKind::accumulating;
  const bool accumulate_right = dec.right_tail.kind == TailKind::accumulating;
  if (dec.intervals.empty() && !accumulate_left && !accumulate_right)
    throw ClassificationError("U is empty");

  // Finite complement points that are not on a tail pattern.
  std::vector<double> finite;
  for (double c : dec.complement_points) {
    const bool on_left = accumulate_left && detail::on_pattern(c, *dec.left_tail.pattern);
    const bool on_right = accumulate_right && detail::on_pattern(c, *dec.right_tail.pattern);
    if (!on_left && !on_right) finite.push_back(c);
  }
  std::sort(finite.begin(), finite.end());

  AnchorData anchors;
  CaseTag tag = CaseTag::none;

  if (dec.domain == DomainKind::half_line) {
    if (!accumulate_right) {
      if (dec.intervals.empty() || dec.intervals.back().hi != inf)
        throw ClassificationError("half-line U has no unbounded component");
      tag = CaseTag::half_i;
      anchors.b = dec.intervals.back().lo;
    } else {
      tag = CaseTag::half_ii;
      const double floor_pt = finite.empty() ? 0.0 : std::max(0.0, finite.back());
      const auto x1 = detail::pattern_above(*dec.right_tail.pattern, floor_pt);
      if (!x1) throw ClassificationError("right tail pattern has no points beyond the core");
      anchors.right = LatticeAnchor{*x1, dec.right_tail.pattern->spacing};
    }
    dec.case_tag = tag;
    dec.anchors = anchors;
    return dec;
  }
  if (dec.domain != DomainKind::line) throw ClassificationError("case analysis needs a 1-d domain");

  if (!accumulate_left && !accumulate_right) {
    if (dec.intervals.size() == 1 && dec.intervals.front().lo == -inf &&
        dec.intervals.front().hi == inf) {
      tag = CaseTag::line_i;
    } else {
      if (dec.intervals.front().lo != -inf || dec.intervals.back().hi != inf)
        throw ClassificationError("U lacks an unbounded component on one side");
      tag = CaseTag::line_ii;
      anchors.a = dec.intervals.front().hi;
      anchors.b = dec.intervals.back().lo;
    }
  } else if (accumulate_left && accumulate_right) {
    tag = CaseTag::line_iii;
    const double low_ref = finite.empty() ? 0.0 : std::min(0.0, finite.front());
    const auto x0 = detail::pattern_floor(*dec.left_tail.pattern, low_ref);
    if (!x0) throw ClassificationError("left tail pattern has no points below the core");
    const double high_ref = std::max(*x0, finite.empty() ? *x0 : finite.back());
    const auto x1 = detail::pattern_above(*dec.right_tail.pattern, high_ref);
    if (!x1) throw ClassificationError("right tail pattern has no points beyond the core");
    anchors.left = LatticeAnchor{*x0, dec.left_tail.pattern->spacing};
    anchors.right = LatticeAnchor{*x1, dec.right_tail.pattern->spacing};
  } else if (accumulate_left) {
    if (dec.intervals.empty() || dec.intervals.back().hi != inf)
      throw ClassificationError("U lacks an unbounded component on the right");
    tag = CaseTag::line_iv;
    anchors.b = dec.intervals.back().lo;
    const double low_ref = finite.empty() ? anchors.b : std::min(anchors.b, finite.front());
    const auto x0 = detail::pattern_floor(*dec.left_tail.pattern, low_ref);
    if (!x0) throw ClassificationError("left tail pattern has no points below the core");
    anchors.left = LatticeAnchor{*x0, dec.left_tail.pattern->spacing};
  } else {
    if (dec.intervals.empty() || dec.intervals.front().lo != -inf)
      throw ClassificationError("U lacks an unbounded component on the left");
    tag = CaseTag::line_v;
    anchors.a = dec.intervals.front().hi;
    const double high_ref = finite.empty() ? anchors.a : std::max(anchors.a, finite.back());
    const auto x1 = detail::pattern_above(*dec.right_tail.pattern, high_ref);
    if (!x1) throw ClassificationError("right tail pattern has no points beyond the core");
    anchors.right = LatticeAnchor{*x1, dec.right_tail.pattern->spacing};
  }
  dec.case_tag = tag;
  dec.anchors = anchors;
  return dec;
}

/// Hamza set of a one-dimensional problem, classified.
inline IntervalDecomposition detect_hamza_set(const ProblemSpec& spec, double window_lo,
                                              double window_hi, double tol) {
  if (spec.domain == DomainKind::euclidean)
    throw SpecError("detect_hamza_set needs a one-dimensional domain");
  DetectionOptions opt;
  opt.window_lo = window_lo;
  opt.window_hi = window_hi;
  opt.tol = tol;
  opt.h0 = spec.options.local_h0;
  auto f = [&spec](double x) { return spec.inverse_density(x); };
  auto pos = [&spec](double x) { return spec.sigma.evaluate(x) * spec.phi.evaluate(x); };
  auto dec = detect_intervals(f, pos, spec.singularities(), spec.domain, opt);
  return classify_case(std::move(dec));
}

inline IntervalDecomposition detect_hamza_set(const ProblemSpec& spec) {
  return detect_hamza_set(spec, spec.options.window_lo, spec.options.window_hi,
                          spec.options.tol);
}

}  // namespace recur
