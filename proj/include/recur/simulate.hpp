#pragma once

// Euler-Maruyama simulation of the diffusion attached to a 1-d form, used as a
// finite-horizon corroboration of verdicts (never as a proof).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "recur/drift.hpp"
#include "recur/line.hpp"
#include "recur/problem.hpp"
#include "recur/verdict.hpp"

namespace recur {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256** with one stream per (seed, path index). The four state words
/// come from splitmix64 started at seed, advanced past a mix of the index, so
/// a path's numbers do not depend on which thread runs it.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t sm = seed;
    std::uint64_t mix = splitmix64(sm) ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    for (auto& w : s_) w = splitmix64(mix);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on (0, 1) from the top 53 bits.
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal by the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct PathSummary {
  std::size_t index = 0;
  double first_return = std::numeric_limits<double>::quiet_NaN();  // NaN: no return before T
  double occupation = 0.0;
  bool aborted = false;     // non-finite state
  bool unresolved = false;  // step size floor reached before the first return
  double final_state = 0.0;
  double min_state = 0.0;
  double final_time = 0.0;

  bool returned() const { return !std::isnan(first_return); }
};

inline void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw SpecError("simulation dt must be positive");
  if (!(cfg.horizon > 0.0)) throw SpecError("simulation horizon must be positive");
  if (cfg.dt > cfg.horizon / 100.0) throw SpecError("simulation dt must be at most T/100");
  if (cfg.n_paths == 0) throw SpecError("simulation needs at least one path");
  if (!(cfg.target_lo < cfg.target_hi)) throw SpecError("target interval must have positive length");
}

/// One Euler-Maruyama path X_{k+1} = X_k + b dt + sqrt(sigma dt) N(0,1),
/// mirrored by |.| when cfg.reflect is set. The step is halved while
/// |b| dt > 0.1 sqrt(sigma dt), down to dt / 2^10.
inline PathSummary simulate_path(const DriftField& field, const SimConfig& cfg, std::size_t index) {
  PathRng rng(cfg.seed, index);
  PathSummary out;
  out.index = index;
  const double dt_min = cfg.dt / 1024.0;
  double x = cfg.x0;
  double t = 0.0;
  out.min_state = x;
  const bool started_inside = x >= cfg.target_lo && x <= cfg.target_hi;
  if (started_inside) out.first_return = 0.0;
  if (started_inside && cfg.stop_at_return) {
    out.final_state = x;
    return out;
  }
  // Pre-evaluated coefficients at the current state; recomputed after each move.
  double b = 0.0, s = 0.0;
  auto eval = [&](double at) -> bool {
    try {
      if (field.both) {
        std::tie(b, s) = field.both(at);
      } else {
        b = field.drift(at);
        s = field.diffusion(at);
      }
    } catch (const EvaluationError&) {
      return false;
    }
    return std::isfinite(b) && std::isfinite(s) && s >= 0.0;
  };
  if (!eval(x)) {
    out.aborted = true;
    out.final_state = x;
    return out;
  }
  while (t < cfg.horizon) {
    double h = std::min(cfg.dt, cfg.horizon - t);
    while (std::fabs(b) * h > 0.1 * std::sqrt(s * h) && h > dt_min) h *= 0.5;
    if (h <= dt_min && std::fabs(b) * h > 0.1 * std::sqrt(s * h) && !out.returned()) {
      out.unresolved = true;
      break;
    }
    x += b * h + std::sqrt(s * h) * rng.normal();
    if (cfg.reflect) x = std::fabs(x);
    t += h;
    if (!std::isfinite(x) || !eval(x)) {
      out.aborted = true;
      break;
    }
    out.min_state = std::min(out.min_state, x);
    if (x >= cfg.target_lo && x <= cfg.target_hi) {
      out.occupation += h;
      if (!out.returned()) {
        out.first_return = t;
        if (cfg.stop_at_return) break;
      }
    }
  }
  out.final_state = x;
  out.final_time = t;
  return out;
}

/// All paths of a run, in index order. Work is handed out by an atomic
/// counter; each path draws from its own stream, so the result does not
/// depend on the thread count.
inline std::vector<PathSummary> simulate_paths(const DriftField& field, const SimConfig& cfg) {
  validate(cfg);
  std::vector<PathSummary> out(cfg.n_paths);
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.n_paths));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.n_paths; i = next++) out[i] = simulate_path(field, cfg, i);
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

struct RecurrenceEstimate {
  double return_probability = 0.0;
  double ci_halfwidth = 0.0;
  double mean_occupation = 0.0;
  std::string excursion_note;
  std::size_t completed = 0;
  std::size_t returned = 0;
  std::size_t aborted = 0;
  std::size_t unresolved = 0;
  double horizon = 0.0;
  std::string label = "corroboration, not verification";

  double lower() const { return std::max(0.0, return_probability - ci_halfwidth); }
  double upper() const { return std::min(1.0, return_probability + ci_halfwidth); }
};

/// Fraction of completed paths that reach the target before T, with a 95%
/// normal-approximation interval. Aborted and unresolved paths are excluded
/// and counted.
inline RecurrenceEstimate summarize(const std::vector<PathSummary>& paths, double horizon) {
  RecurrenceEstimate est;
  est.horizon = horizon;
  double occ = 0.0;
  for (const auto& p : paths) {
    if (p.aborted) {
      ++est.aborted;
      continue;
    }
    if (p.unresolved) {
      ++est.unresolved;
      continue;
    }
    ++est.completed;
    if (p.returned()) ++est.returned;
    occ += p.occupation;
  }
  if (est.completed == 0) throw std::runtime_error("no completed paths");
  const double n = static_cast<double>(est.completed);
  est.return_probability = static_cast<double>(est.returned) / n;
  est.ci_halfwidth = 1.96 * std::sqrt(est.return_probability * (1.0 - est.return_probability) / n);
  est.mean_occupation = occ / n;
  est.excursion_note = std::to_string(est.returned) + " of " + std::to_string(est.completed) +
                       " completed paths reached the target before T=" + format_number(horizon);
  if (est.aborted) est.excursion_note += "; " + std::to_string(est.aborted) + " aborted";
  if (est.unresolved) est.excursion_note += "; " + std::to_string(est.unresolved) + " unresolved";
  return est;
}

inline RecurrenceEstimate estimate_return(const DriftField& field, const SimConfig& cfg,
                                          std::vector<PathSummary>* paths_out = nullptr) {
  auto paths = simulate_paths(field, cfg);
  auto est = summarize(paths, cfg.horizon);
  if (paths_out) *paths_out = std::move(paths);
  return est;
}

/// Pooled two-proportion z statistic for p_a > p_b.
inline double two_proportion_z(const RecurrenceEstimate& a, const RecurrenceEstimate& b) {
  const double na = static_cast<double>(a.completed), nb = static_cast<double>(b.completed);
  const double pooled = (a.return_probability * na + b.return_probability * nb) / (na + nb);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
  if (se == 0.0) return a.return_probability == b.return_probability ? 0.0
                        : std::copysign(std::numeric_limits<double>::infinity(),
                                        a.return_probability - b.return_probability);
  return (a.return_probability - b.return_probability) / se;
}

/// Infinite-horizon probability of ever reaching `level` from x0 > level for
/// the diffusion with scale density 1/(sigma phi), when that density is
/// integrable at +infinity: int_{x0}^inf / int_{level}^inf.
inline std::optional<double> scale_hitting_probability(const ProblemSpec& spec, double x0,
                                                       double level, double tol = 1e-10) {
  if (!(x0 > level)) return 1.0;
  auto f = [&spec](double x) { return spec.inverse_density(x); };
  // Tail beyond x0 through the substitution x = x0 + t/(1-t) on (0, 1).
  auto tail = [&](double from) {
    auto g = [&](double t) {
      const double u = 1.0 - t;
      return f(from + t / u) / (u * u);
    };
    return integrate(g, 0.0, 1.0, tol, Endpoint::right);
  };
  try {
    const auto far = tail(x0);
    const auto near = reciprocal_integral(spec, level, x0, tol);
    if (!far.converged || !near.converged || !std::isfinite(far.value)) return std::nullopt;
    return far.value / (far.value + near.value);
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
}

struct CorroborationReport {
  RecurrenceEstimate estimate;
  std::optional<double> ever_hit_probability;
  std::string agreement;  // "consistent", "consistent with transience flag", "inconsistent", "no expectation"
  std::string statement;
  std::string caveat =
      "finite-horizon simulation proves nothing about recurrence; corroboration, not verification";
};

/// Compares a verdict with simulated return statistics. Recurrent verdicts
/// expect a high return fraction (at least 1/2 within the interval); a
/// transience flag expects the fraction to stay below 1 and not above the
/// scale-function probability of ever reaching the target.
inline CorroborationReport corroborate(const RecurrenceVerdict& verdict, const DriftField& field,
                                       const SimConfig& cfg,
                                       std::optional<double> ever_hit_probability = std::nullopt) {
  CorroborationReport rep;
  rep.estimate = estimate_return(field, cfg);
  rep.ever_hit_probability = ever_hit_probability;
  const auto& e = rep.estimate;
  const std::string frac = format_number(e.return_probability) + " +- " + format_number(e.ci_halfwidth);
  if (verdict.kind == VerdictKind::recurrent) {
    const bool ok = e.upper() >= 0.5;
    rep.agreement = ok ? "consistent" : "inconsistent";
    rep.statement = "verdict Recurrent; return fraction " + frac +
                    (ok ? " is high" : " is low at this horizon");
  } else if (verdict.transient_by_scale) {
    const double sd = std::sqrt(std::max(e.return_probability * (1.0 - e.return_probability), 1e-12) /
                                static_cast<double>(e.completed));
    bool ok = e.upper() < 1.0;
    if (ever_hit_probability) ok = ok && e.return_probability <= *ever_hit_probability + 3.0 * sd;
    rep.agreement = ok ? "consistent with transience flag" : "inconsistent";
    rep.statement = "verdict Inconclusive with transience flag; return fraction " + frac;
    if (ever_hit_probability)
      rep.statement += ", scale-function probability of ever returning " +
                       format_number(*ever_hit_probability);
  } else {
    rep.agreement = "no expectation";
    rep.statement = "verdict Inconclusive; return fraction " + frac;
  }
  return rep;
}

inline void write_paths_csv(std::ostream& os, const std::vector<PathSummary>& paths) {
  os << "path,first_return_time,occupation_time,aborted,unresolved,final_state\n";
  char buf[160];
  for (const auto& p : paths) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d,%d,%.17g\n", p.index, p.first_return,
                  p.occupation, p.aborted ? 1 : 0, p.unresolved ? 1 : 0, p.final_state);
    os << buf;
  }
}

}  // namespace recur
