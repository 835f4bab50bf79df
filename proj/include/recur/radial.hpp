#pragma once

// Multidimensional criteria for forms sum_ij a_ij d_i f d_j g phi dx on R^d:
// surface mass psi(r) of phi on spheres, the ellipticity envelope b(r), the
// radial criterion (a_n from 1/psi, plus b/a_n -> 0) and the envelope
// criterion built from a radial majorant of ||A|| phi.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "recur/divergence.hpp"
#include "recur/hamza.hpp"
#include "recur/line.hpp"
#include "recur/problem.hpp"
#include "recur/quadrature.hpp"
#include "recur/verdict.hpp"

namespace recur {

class UnsupportedSpec : public SpecError {
 public:
  using SpecError::SpecError;
};

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(std::size_t d) {
  const double h = 0.5 * static_cast<double>(d);
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

/// Area of the unit sphere in R^d, d * vol_d(B_1).
inline double unit_sphere_area(std::size_t d) {
  return static_cast<double>(d) * unit_ball_volume(d);
}

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace detail

struct SurfaceRule {
  int circle_points = 256;  // d = 2 trapezoid
  int polar_points = 32;    // d = 3 Gauss-Legendre in cos(theta)
  int azimuth_points = 64;  // d = 3 trapezoid in the azimuth
};

/// psi(r) = integral of phi over the sphere of radius r.
///
/// Radial phi uses phi(r) * |S^{d-1}| r^{d-1}. Otherwise d = 2 uses the
/// trapezoid rule on the circle and d = 3 a Gauss-Legendre x trapezoid product
/// rule; other dimensions need a radial phi.
inline double surface_mass(const Expr& phi, std::size_t d, double r, const SurfaceRule& rule = {}) {
  if (!(r > 0.0)) throw std::invalid_argument("surface_mass: r must be positive");
  if (d < 2) throw SpecError("surface_mass: dimension must be at least 2");
  std::vector<double> pt(d, 0.0);
  if (phi.is_radial()) {
    pt[0] = r;
    return phi(std::span<const double>(pt)) * unit_sphere_area(d) *
           std::pow(r, static_cast<double>(d) - 1.0);
  }
  if (d == 2) {
    const int m = rule.circle_points;
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
      const double t = 2.0 * std::numbers::pi * k / m;
      pt[0] = r * std::cos(t);
      pt[1] = r * std::sin(t);
      sum += phi(std::span<const double>(pt));
    }
    return sum * 2.0 * std::numbers::pi * r / m;
  }
  if (d == 3) {
    std::vector<double> z, w;
    detail::gauss_legendre(rule.polar_points, z, w);
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double s = std::sqrt(1.0 - z[i] * z[i]);
      double ring = 0.0;
      for (int k = 0; k < rule.azimuth_points; ++k) {
        const double t = 2.0 * std::numbers::pi * k / rule.azimuth_points;
        pt[0] = r * s * std::cos(t);
        pt[1] = r * s * std::sin(t);
        pt[2] = r * z[i];
        ring += phi(std::span<const double>(pt));
      }
      sum += w[i] * ring * 2.0 * std::numbers::pi / rule.azimuth_points;
    }
    return sum * r * r;
  }
  throw UnsupportedSpec("surface_mass: non-radial phi is only supported for d = 2 and d = 3");
}

/// Unit directions used to probe the ball: uniform on the circle for d = 2, a
/// Fibonacci lattice for d = 3, axes, axis pairs and fixed pseudo-random
/// directions beyond.
inline std::vector<std::vector<double>> probe_directions(std::size_t d) {
  std::vector<std::vector<double>> dirs;
  if (d == 2) {
    for (int k = 0; k < 64; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 64;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
    return dirs;
  }
  if (d == 3) {
    const int m = 128;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < m; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / m;
      const double s = std::sqrt(1.0 - z * z);
      dirs.push_back({s * std::cos(golden * k), s * std::sin(golden * k), z});
    }
    return dirs;
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> v(d, 0.0);
      v[i] = sgn;
      dirs.push_back(v);
    }
    for (std::size_t j = i + 1; j < d; ++j)
      for (double sgn : {1.0, -1.0}) {
        std::vector<double> v(d, 0.0);
        v[i] = std::sqrt(0.5);
        v[j] = sgn * std::sqrt(0.5);
        dirs.push_back(v);
      }
  }
  std::mt19937_64 gen(20240901);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 64; ++k) {
    std::vector<double> v(d);
    double norm = 0.0;
    for (auto& c : v) {
      c = normal(gen);
      norm += c * c;
    }
    for (auto& c : v) c /= std::sqrt(norm);
    dirs.push_back(v);
  }
  return dirs;
}

inline Eigen::MatrixXd evaluate_matrix(const SymmetricMatrix& a, std::span<const double> x) {
  const std::size_t d = a.dimension();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a.at(i, j)(x);
  return m;
}

inline double largest_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
  return solver.eigenvalues().maxCoeff();
}

/// Sampled ellipticity envelope: b(r) = running maximum over |x| <= r of the
/// largest eigenvalue of A(x). r_grid must be increasing.
inline std::vector<double> ellipticity_envelope(const SymmetricMatrix& a,
                                                const std::vector<double>& r_grid,
                                                int shells_per_unit = 8) {
  if (!std::is_sorted(r_grid.begin(), r_grid.end()))
    throw std::invalid_argument("ellipticity_envelope: radii must be increasing");
  const std::size_t d = a.dimension();
  const auto dirs = probe_directions(d);
  std::vector<double> x(d, 0.0);
  double running = largest_eigenvalue(evaluate_matrix(a, x));
  std::vector<double> out;
  double last_r = 0.0;
  for (double r : r_grid) {
    const int shells = std::max(1, static_cast<int>(std::ceil((r - last_r) * shells_per_unit)));
    for (int s = 1; s <= shells; ++s) {
      const double rho = last_r + (r - last_r) * s / shells;
      for (const auto& dir : dirs) {
        for (std::size_t i = 0; i < d; ++i) x[i] = rho * dir[i];
        running = std::max(running, largest_eigenvalue(evaluate_matrix(a, x)));
      }
    }
    last_r = r;
    out.push_back(running);
  }
  return out;
}

/// psi, b and the radial Hamza decomposition of 1/psi on [0, inf).
struct RadialProfile {
  std::function<double(double)> psi;
  std::function<double(double)> b_env;
  IntervalDecomposition U_radial;
  std::size_t dimension = 2;
  bool sampled_envelope = false;
  Singularities psi_singularities;
};

/// Builds the profile of a euclidean spec. b(r) comes from the analytic
/// ellipticity expression when given, otherwise from sampling up to r_max.
inline RadialProfile radial_profile(const ProblemSpec& spec, double r_max) {
  if (spec.domain != DomainKind::euclidean) throw SpecError("radial_profile needs a euclidean spec");
  const std::size_t d = spec.dimension;
  RadialProfile prof;
  prof.dimension = d;
  const Expr phi = spec.phi.expr();
  prof.psi = [phi, d](double r) { return surface_mass(phi, d, r); };

  if (spec.ellipticity) {
    const Expr b = *spec.ellipticity;
    prof.b_env = [b](double r) { return b(r); };
  } else {
    const double step = 0.25;
    std::vector<double> grid;
    for (double r = step; r < r_max + step; r += step) grid.push_back(r);
    auto values = ellipticity_envelope(spec.matrix, grid);
    prof.sampled_envelope = true;
    prof.b_env = [grid, values](double r) {
      auto it = std::lower_bound(grid.begin(), grid.end(), r - 1e-12);
      if (it == grid.end()) return values.back();
      return values[static_cast<std::size_t>(it - grid.begin())];
    };
  }

  // psi's own singular set in r: those of the radial parts of phi.
  prof.psi_singularities = collect_singularities(phi, SingularVariable::radius);
  DetectionOptions opt;
  opt.window_lo = 0.0;
  opt.window_hi = spec.options.window_hi;
  opt.tol = spec.options.tol;
  opt.h0 = spec.options.local_h0;
  auto f = [psi = prof.psi](double r) { return 1.0 / psi(r); };
  auto dec = detect_intervals(f, prof.psi, prof.psi_singularities, DomainKind::half_line, opt);
  prof.U_radial = classify_case(std::move(dec));
  return prof;
}

/// Radial-variable integral of 1/psi, split at psi's singular points.
inline IntegralResult inverse_psi_integral(const RadialProfile& prof, double lo, double hi,
                                           double tol, Endpoint flags = Endpoint::none) {
  std::vector<double> cuts;
  for (double p : prof.psi_singularities.points)
    if (p > lo && p < hi) cuts.push_back(p);
  for (const auto& pat : prof.psi_singularities.patterns)
    for (double p : pat.points_in(lo, hi))
      if (p > lo && p < hi) cuts.push_back(p);
  std::sort(cuts.begin(), cuts.end());
  if (prof.psi_singularities.contains(lo)) flags = flags | Endpoint::left;
  if (prof.psi_singularities.contains(hi)) flags = flags | Endpoint::right;
  auto f = [&prof](double r) { return 1.0 / prof.psi(r); };
  IntegralResult total;
  total.converged = true;
  double a = lo;
  for (std::size_t i = 0; i <= cuts.size(); ++i) {
    const double b = i < cuts.size() ? cuts[i] : hi;
    Endpoint piece = Endpoint::none;
    if (i > 0 || has(flags, Endpoint::left)) piece = piece | Endpoint::left;
    if (i < cuts.size() || has(flags, Endpoint::right)) piece = piece | Endpoint::right;
    const auto r = integrate(f, a, b, tol, piece);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.function_evals += r.function_evals;
    total.converged = total.converged && r.converged;
    a = b;
  }
  return total;
}

/// Upper bound b(r_n)/a_n on E(u_n, u_n) for the radial construction.
inline double radial_energy_audit(const RadialProfile& prof, int n, double a_n) {
  const auto layout = ramp_layout(prof.U_radial, n);
  return prof.b_env(layout.ramps.front().end) / a_n;
}

/// Radial criterion: a_n from 1/psi must diverge and b(r_n)/a_n must vanish,
/// where r_n is the outer end of the ramp (a+1+n, or d_n with cutoffs).
inline RecurrenceVerdict classify_radial(const RadialProfile& prof, const Options& options) {
  RecurrenceVerdict v;
  v.criterion = "radial";
  v.case_tag = prof.U_radial.case_tag;
  v.n_max = options.n_max;
  v.label = evidence_label(options.n_max);
  v.assumptions = {
      "closability of the form on smooth compactly supported functions is assumed, not verified",
      "psi(r) is audited for positivity on a grid only"};
  if (prof.sampled_envelope)
    v.assumptions.push_back("sampled envelope: b(r) is a sampled lower approximation of c_{B_r}");
  v.notes = prof.U_radial.notes;
  if (v.case_tag != CaseTag::half_i && v.case_tag != CaseTag::half_ii) {
    v.notes.push_back("radial Hamza set matches no case");
    return v;
  }

  SequenceEvidence an{"a_n", {}, {}};
  SequenceEvidence ratio{"a_n/b(r_n)", {}, {}};
  for (int n = 1; n <= options.n_max; ++n) {
    const auto layout = ramp_layout(prof.U_radial, n);
    const Ramp& ramp = layout.ramps.front();
    SequenceSample s{n, 0.0, 0.0, true};
    try {
      const auto r = inverse_psi_integral(prof, ramp.lo(), ramp.hi(), options.tol * 1e-2,
                                          ramp.cutoff ? Endpoint::right : Endpoint::none);
      s.value = r.value;
      s.error = r.error_estimate;
      s.reliable = r.converged && std::isfinite(r.value);
    } catch (const EvaluationError&) {
      s.value = std::numeric_limits<double>::quiet_NaN();
      s.reliable = false;
    }
    an.samples.push_back(s);
    const double b = prof.b_env(ramp.end);
    v.profiles["b(r_n)"].push_back({ramp.end, b});
    v.profiles["psi(r_n)"].push_back({ramp.end, prof.psi(ramp.end)});
    SequenceSample q = s;
    q.value = s.value / b;
    q.reliable = s.reliable && b > 0.0 && std::isfinite(b);
    ratio.samples.push_back(q);
    if (s.reliable && s.value > 0.0)
      v.energy_trace.push_back({n, b / s.value, std::numeric_limits<double>::quiet_NaN()});
  }
  an.diagnosis = divergence_diagnose(fit_points(an.samples), options.divergence());
  ratio.diagnosis = divergence_diagnose(fit_points(ratio.samples), options.divergence());
  const bool ok = an.diagnosis.kind == DivergenceKind::diverges_to_infinity &&
                  ratio.diagnosis.kind == DivergenceKind::diverges_to_infinity;
  v.kind = ok ? VerdictKind::recurrent : VerdictKind::inconclusive;
  if (an.diagnosis.kind != DivergenceKind::diverges_to_infinity)
    v.notes.push_back("a_n diagnosed " + std::string(to_string(an.diagnosis.kind)));
  if (ratio.diagnosis.kind != DivergenceKind::diverges_to_infinity)
    v.notes.push_back("b(r_n)/a_n not diagnosed to vanish (a_n/b diagnosed " +
                      std::string(to_string(ratio.diagnosis.kind)) + ")");
  v.sequences = {std::move(an), std::move(ratio)};
  return v;
}

/// a_n = |S^{d-1}| * integral from rho to n of s^(1-d)/bound(s) ds.
inline IntegralResult envelope_an(const EnvelopeSpec& env, double n, double tol) {
  const double d = static_cast<double>(env.dimension);
  auto f = [&env, d](double s) { return std::pow(s, 1.0 - d) / env.phi_bound(s); };
  IntegralResult r = integrate(f, env.rho, n, tol);
  const double area = unit_sphere_area(env.dimension);
  r.value *= area;
  r.error_estimate *= area;
  return r;
}

/// Upper bound d^2 vol_d(B_1)^2 / a_n on E(u_n, u_n) for the envelope construction.
inline double envelope_energy_audit(const EnvelopeSpec& env, double a_n) {
  const double area = unit_sphere_area(env.dimension);
  return area * area / a_n;
}

/// Envelope criterion: Recurrent iff every a_n (n > rho) is finite and a_n
/// diverges.
inline RecurrenceVerdict classify_envelope(const EnvelopeSpec& env, const Options& options) {
  if (!(env.rho > 0.0)) throw SpecError("envelope rho must be positive");
  if (env.dimension < 2) throw SpecError("envelope dimension must be at least 2");
  RecurrenceVerdict v;
  v.criterion = "envelope";
  v.n_max = options.n_max;
  v.label = evidence_label(options.n_max);
  v.assumptions = {
      "closability of the form on smooth compactly supported functions is assumed, not verified",
      "the bound ||A(x)|| phi(x) <= bound(|x|) outside B_rho is assumed unless audited"};
  SequenceEvidence an{"a_n", {}, {}};
  bool all_finite = true;
  const int first = static_cast<int>(std::floor(env.rho)) + 1;
  for (int n = first; n <= options.n_max; ++n) {
    SequenceSample s{n, 0.0, 0.0, true};
    try {
      const auto r = envelope_an(env, n, options.tol * 1e-2);
      s.value = r.value;
      s.error = r.error_estimate;
      s.reliable = r.converged && std::isfinite(r.value);
    } catch (const EvaluationError& e) {
      s.value = std::numeric_limits<double>::infinity();
      s.reliable = false;
    }
    if (!std::isfinite(s.value) || !s.reliable) all_finite = false;
    an.samples.push_back(s);
    if (s.reliable && s.value > 0.0)
      v.energy_trace.push_back({n, envelope_energy_audit(env, s.value),
                                std::numeric_limits<double>::quiet_NaN()});
  }
  an.diagnosis = divergence_diagnose(fit_points(an.samples), options.divergence());
  if (!all_finite) v.notes.push_back("a_n is not finite (or not computable) for some n > rho");
  v.kind = all_finite && an.diagnosis.kind == DivergenceKind::diverges_to_infinity
               ? VerdictKind::recurrent
               : VerdictKind::inconclusive;
  if (an.diagnosis.kind != DivergenceKind::diverges_to_infinity)
    v.notes.push_back("a_n diagnosed " + std::string(to_string(an.diagnosis.kind)));
  v.sequences = {std::move(an)};
  return v;
}

struct EnvelopeAudit {
  bool passed = true;
  double worst_ratio = 0.0;  // max of ||A|| phi / bound over the samples
  std::vector<double> worst_point;
};

/// Checks ||A(x)||_F phi(x) <= bound(|x|) on shells rho < |x| <= r_max.
inline EnvelopeAudit audit_envelope(const SymmetricMatrix& a, const Expr& phi,
                                    const EnvelopeSpec& env, double r_max, int shells = 64) {
  EnvelopeAudit audit;
  const std::size_t d = a.dimension();
  const auto dirs = probe_directions(d);
  std::vector<double> x(d);
  for (int s = 1; s <= shells; ++s) {
    const double r = env.rho + (r_max - env.rho) * s / shells;
    const double bound = env.phi_bound(r);
    for (const auto& dir : dirs) {
      for (std::size_t i = 0; i < d; ++i) x[i] = r * dir[i];
      const double lhs = evaluate_matrix(a, x).norm() * phi(std::span<const double>(x));
      const double ratio = lhs / bound;
      if (ratio > audit.worst_ratio) {
        audit.worst_ratio = ratio;
        audit.worst_point = x;
      }
    }
  }
  audit.passed = audit.worst_ratio <= 1.0 + 1e-12;
  return audit;
}

/// Full multidimensional classification: the radial criterion, plus the
/// envelope criterion when a bound is supplied. Either criterion suffices.
inline RecurrenceVerdict classify_euclidean(const ProblemSpec& spec) {
  if (spec.domain != DomainKind::euclidean) throw SpecError("classify_euclidean needs R^d");
  const Options& opt = spec.options;
  RecurrenceVerdict combined;
  combined.n_max = opt.n_max;
  combined.label = evidence_label(opt.n_max);

  std::optional<RecurrenceVerdict> radial;
  try {
    const RadialProfile prof = radial_profile(spec, opt.n_max + opt.window_hi + 2.0);
    radial = classify_radial(prof, opt);
  } catch (const UnsupportedSpec& e) {
    combined.notes.push_back(std::string("radial criterion unavailable: ") + e.what());
  } catch (const ClassificationError& e) {
    combined.notes.push_back(std::string("radial criterion unavailable: ") + e.what());
  }

  std::optional<RecurrenceVerdict> envelope;
  if (spec.envelope) {
    envelope = classify_envelope(*spec.envelope, opt);
    const auto audit = audit_envelope(spec.matrix, spec.phi.expr(), *spec.envelope,
                                      spec.envelope->rho + opt.n_max);
    envelope->profiles["envelope audit worst ratio"].push_back({0.0, audit.worst_ratio});
    if (!audit.passed) {
      envelope->notes.push_back("envelope bound fails on the audit grid; criterion not applicable");
      envelope->kind = VerdictKind::inconclusive;
    }
  }

  combined.criterion = radial && envelope ? "radial+envelope" : (radial ? "radial" : "envelope");
  combined.kind = VerdictKind::inconclusive;
  auto absorb = [&combined](const RecurrenceVerdict& v, const std::string& prefix) {
    if (v.kind == VerdictKind::recurrent) combined.kind = VerdictKind::recurrent;
    if (v.case_tag != CaseTag::none) combined.case_tag = v.case_tag;
    for (auto s : v.sequences) {
      s.name = prefix + " " + s.name;
      combined.sequences.push_back(std::move(s));
    }
    for (const auto& [k, pts] : v.profiles) combined.profiles[prefix + " " + k] = pts;
    for (const auto& e : v.energy_trace) combined.energy_trace.push_back(e);
    for (const auto& a : v.assumptions)
      if (std::find(combined.assumptions.begin(), combined.assumptions.end(), a) ==
          combined.assumptions.end())
        combined.assumptions.push_back(a);
    for (const auto& n : v.notes) combined.notes.push_back(prefix + ": " + n);
    combined.notes.push_back(prefix + " criterion: " + to_string(v.kind));
  };
  if (radial) absorb(*radial, "radial");
  if (envelope) absorb(*envelope, "envelope");
  return combined;
}

}  // namespace recur
