#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recur/divergence.hpp"
#include "recur/expression.hpp"

namespace recur {

enum class DomainKind { line, half_line, euclidean };

inline const char* to_string(DomainKind d) {
  switch (d) {
    case DomainKind::line: return "line";
    case DomainKind::half_line: return "half_line";
    case DomainKind::euclidean: return "euclidean";
  }
  return "line";
}

struct Options {
  double tol = 1e-8;
  int n_max = 64;
  double window_lo = -10.0;
  double window_hi = 10.0;
  double divergence_floor = 1e3;
  double fit_tolerance = 1e-2;
  bool scale_probe = false;
  double local_h0 = 0.5;  // largest neighborhood for local integrability tests

  DivergenceOptions divergence() const {
    DivergenceOptions d;
    d.divergence_floor = divergence_floor;
    d.fit_tolerance = fit_tolerance;
    return d;
  }

  bool operator==(const Options&) const = default;
};

/// Symmetric d x d matrix of expressions; (i, j) and (j, i) share one node.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t d) : dim_(d), upper_(d * (d + 1) / 2, Expr::constant(0.0)) {
    for (std::size_t i = 0; i < d; ++i) set(i, i, Expr::constant(1.0));
  }

  static SymmetricMatrix identity(std::size_t d) { return SymmetricMatrix(d); }

  /// s(|x|) * identity
  static SymmetricMatrix scalar(std::size_t d, const Expr& s) {
    SymmetricMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) m.set(i, i, s);
    return m;
  }

  std::size_t dimension() const { return dim_; }
  const Expr& at(std::size_t i, std::size_t j) const { return upper_[slot(i, j)]; }
  void set(std::size_t i, std::size_t j, Expr e) { upper_[slot(i, j)] = std::move(e); }

  bool operator==(const SymmetricMatrix& o) const { return dim_ == o.dim_ && upper_ == o.upper_; }

 private:
  std::size_t slot(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * dim_ - i * (i + 1) / 2 + j;
  }
  std::size_t dim_ = 0;
  std::vector<Expr> upper_;
};

/// Radial majorant for the envelope criterion: ||A(x)|| phi(x) <= bound(|x|) for |x| >= rho.
struct EnvelopeSpec {
  Expr phi_bound = Expr::constant(1.0);  // function of s = |x|, written in the variable x
  double rho = 1.0;
  std::size_t dimension = 2;
  bool operator==(const EnvelopeSpec&) const = default;
};

struct SimConfig {
  double x0 = 2.0;
  double dt = 1e-3;
  double horizon = 100.0;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  double target_lo = -1.0;
  double target_hi = 1.0;
  bool reflect = false;
  bool stop_at_return = false;  // skip occupation tracking after the first return
  unsigned threads = 0;         // 0: hardware concurrency
  bool operator==(const SimConfig&) const = default;
};

struct ProblemSpec {
  std::string name = "unnamed";
  DomainKind domain = DomainKind::line;
  std::size_t dimension = 1;
  Coefficient sigma{Expr::constant(1.0)};
  Coefficient phi{Expr::constant(1.0)};
  SymmetricMatrix matrix;               // euclidean only
  std::optional<Expr> ellipticity;      // analytic b(r), variable x stands for r
  std::optional<EnvelopeSpec> envelope; // euclidean only
  std::optional<SimConfig> simulation;
  Options options;

  /// sigma * phi with the declared singularities of both factors.
  Singularities singularities() const {
    Singularities s = sigma.singularities();
    s.merge(phi.singularities());
    return s;
  }

  /// 1 / (sigma phi) at x; +inf at declared zeros is returned as-is. A factor
  /// that overflows to +inf away from its declared points (exp(x^2) at large
  /// x) gives 0, the limit of the reciprocal.
  double inverse_density(double x) const {
    const double rs = sigma.expr()(x), rp = phi.expr()(x);
    const bool overflow = (rs == HUGE_VAL && std::isfinite(rp) && rp > 0.0 && !sigma.singularities().contains(x)) ||
                          (rp == HUGE_VAL && std::isfinite(rs) && rs > 0.0 && !phi.singularities().contains(x));
    if (overflow) return 0.0;
    const double s = sigma.evaluate(x);
    const double p = phi.evaluate(x);
    return 1.0 / (s * p);
  }

  bool operator==(const ProblemSpec&) const = default;
};

}  // namespace recur
