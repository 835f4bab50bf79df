#pragma once

// Coefficient expressions: a closed catalog of analytic primitives (powers,
// exponentials, logarithms, polynomials, piecewise glue, tables, lattice
// powers) combined by sums and products. Trees are immutable and shared, so
// copying an Expr is cheap and a_ij / a_ji can reference the same node.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace recur {

class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, double x)
      : std::runtime_error(what + " at x=" + to_string_exact(x)), point_(x) {}

  double point() const noexcept { return point_; }

 private:
  static std::string to_string_exact(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  }
  double point_;
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Forward-mode dual number: value and first derivative.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double value, double slope = 0.0) : v(value), d(slope) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

namespace detail {

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

inline double exp_(double x) { return std::exp(x); }
inline Dual exp_(Dual x) {
  const double e = std::exp(x.v);
  return {e, e * x.d};
}
inline double log_(double x) { return std::log(x); }
inline Dual log_(Dual x) { return {std::log(x.v), x.d / x.v}; }

// |u|^alpha with derivative alpha |u|^(alpha-1) sign(u) u'
// |u|^alpha with exact shortcuts for small integer and half-integer exponents,
// which the common fixtures use and which std::pow handles slowly.
inline double pos_pow(double a, double alpha) {
  const double twice = 2.0 * alpha;
  if (twice == std::floor(twice) && std::fabs(alpha) <= 8.0) {
    const int k = static_cast<int>(std::floor(std::fabs(alpha)));
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= a;
    if (std::fabs(alpha) != k) r *= std::sqrt(a);
    return alpha < 0.0 ? 1.0 / r : r;
  }
  return std::pow(a, alpha);
}

inline double abs_pow(double u, double alpha) {
  if (alpha == 0.0) return 1.0;
  return pos_pow(std::fabs(u), alpha);
}
inline Dual abs_pow(Dual u, double alpha) {
  if (alpha == 0.0) return {1.0, 0.0};
  const double a = std::fabs(u.v);
  const double value = pos_pow(a, alpha);
  const double sign = u.v > 0.0 ? 1.0 : (u.v < 0.0 ? -1.0 : 0.0);
  double slope = 0.0;
  if (u.d != 0.0)
    slope = alpha * (a > 0.0 ? value / a : pos_pow(a, alpha - 1.0)) * sign * u.d;
  return {value, slope};
}

inline double sqrt_(double x) { return std::sqrt(x); }
inline Dual sqrt_(Dual x) {
  const double s = std::sqrt(x.v);
  return {s, x.d / (2.0 * s)};
}

}  // namespace detail

/// Which way a point pattern extends from its origin.
enum class PatternExtent { both, right, left };

/// Periodic point set origin + k*spacing, k ranging per extent.
struct PointPattern {
  double origin = 0.0;
  double spacing = 1.0;
  PatternExtent extent = PatternExtent::both;

  bool extends_right() const { return extent != PatternExtent::left; }
  bool extends_left() const { return extent != PatternExtent::right; }

  // Index range of pattern points allowed by the extent.
  double nearest(double x) const {
    double k = std::round((x - origin) / spacing);
    if (extent == PatternExtent::right) k = std::max(k, 0.0);
    if (extent == PatternExtent::left) k = std::min(k, 0.0);
    return origin + k * spacing;
  }

  std::vector<double> points_in(double lo, double hi) const {
    std::vector<double> out;
    double kmin = std::ceil((lo - origin) / spacing);
    double kmax = std::floor((hi - origin) / spacing);
    if (extent == PatternExtent::right) kmin = std::max(kmin, 0.0);
    if (extent == PatternExtent::left) kmax = std::min(kmax, 0.0);
    for (double k = kmin; k <= kmax; k += 1.0) out.push_back(origin + k * spacing);
    return out;
  }

  bool contains(double x, double rel = 1e-12) const {
    const double p = nearest(x);
    return std::fabs(p - x) <= rel * std::max(1.0, std::fabs(x));
  }

  bool operator==(const PointPattern&) const = default;
};

inline const char* to_string(PatternExtent e) {
  switch (e) {
    case PatternExtent::both: return "both";
    case PatternExtent::right: return "right";
    case PatternExtent::left: return "left";
  }
  return "both";
}

enum class ExprKind {
  constant,
  coordinate,  // x_i; in one dimension the variable x
  radius,      // |x|
  power,       // |arg - center|^exponent
  exponential, // exp(scale * arg)
  logarithm,   // log(arg)
  polynomial,  // sum_k c_k arg^k
  piecewise,   // pieces[j] on [breakpoints[j-1], breakpoints[j]) of arg
  tabulated,   // linear interpolation of (xs, ys) at arg, flat outside
  lattice_power,  // dist(arg, pattern)^exponent
  sum,
  product,
};

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind = ExprKind::constant;
  double value = 0.0;     // constant value, power center
  double exponent = 0.0;  // power / lattice exponent, exponential scale
  std::size_t index = 0;  // coordinate index
  std::vector<double> coefficients;  // polynomial coeffs, breakpoints, table xs
  std::vector<double> table_y;
  PointPattern pattern;
  NodePtr arg;                    // unary argument
  std::vector<NodePtr> children;  // sum terms, product factors, pieces
};

/// Immutable expression tree evaluated at a point of R^d (d = 1 for the line).
class Expr {
 public:
  Expr() : Expr(constant(1.0)) {}

  static Expr constant(double c) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::constant;
    n->value = c;
    return Expr(std::move(n));
  }
  static Expr x() { return coordinate(0); }
  static Expr coordinate(std::size_t i) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::coordinate;
    n->index = i;
    return Expr(std::move(n));
  }
  static Expr radius() {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::radius;
    return Expr(std::move(n));
  }
  /// |arg - center|^exponent
  static Expr power(double center, double exponent, Expr arg = x()) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::power;
    n->value = center;
    n->exponent = exponent;
    n->arg = arg.node_;
    return Expr(std::move(n));
  }
  static Expr exponential(double scale, Expr arg = x()) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::exponential;
    n->exponent = scale;
    n->arg = arg.node_;
    return Expr(std::move(n));
  }
  static Expr logarithm(Expr arg = x()) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::logarithm;
    n->arg = arg.node_;
    return Expr(std::move(n));
  }
  static Expr polynomial(std::vector<double> coeffs, Expr arg = x()) {
    if (coeffs.empty()) throw SpecError("polynomial needs at least one coefficient");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::polynomial;
    n->coefficients = std::move(coeffs);
    n->arg = arg.node_;
    return Expr(std::move(n));
  }
  static Expr piecewise(std::vector<double> breakpoints, std::vector<Expr> pieces,
                        Expr arg = x()) {
    if (pieces.size() != breakpoints.size() + 1)
      throw SpecError("piecewise needs one more piece than breakpoints");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
      throw SpecError("piecewise breakpoints must be increasing");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::piecewise;
    n->coefficients = std::move(breakpoints);
    for (auto& p : pieces) n->children.push_back(p.node_);
    n->arg = arg.node_;
    return Expr(std::move(n));
  }
  static Expr tabulated(std::vector<double> xs, std::vector<double> ys, Expr arg = x()) {
    if (xs.size() != ys.size() || xs.size() < 2)
      throw SpecError("tabulated expression needs matching x/y tables of size >= 2");
    if (std::adjacent_find(xs.begin(), xs.end(), std::greater_equal<>()) != xs.end())
      throw SpecError("tabulated x values must be strictly increasing");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::tabulated;
    n->coefficients = std::move(xs);
    n->table_y = std::move(ys);
    n->arg = arg.node_;
    return Expr(std::move(n));
  }
  static Expr lattice_power(PointPattern pattern, double exponent, Expr arg = x()) {
    if (!(pattern.spacing > 0.0)) throw SpecError("lattice spacing must be positive");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::lattice_power;
    n->pattern = pattern;
    n->exponent = exponent;
    n->arg = arg.node_;
    return Expr(std::move(n));
  }
  static Expr sum(std::vector<Expr> terms) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::sum;
    for (auto& t : terms) n->children.push_back(t.node_);
    return Expr(std::move(n));
  }
  static Expr product(std::vector<Expr> factors) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::product;
    for (auto& f : factors) n->children.push_back(f.node_);
    return Expr(std::move(n));
  }

  const ExprNode& node() const { return *node_; }
  const NodePtr& shared() const { return node_; }
  bool same_node(const Expr& other) const { return node_ == other.node_; }

  template <class T>
  T eval(std::span<const T> point) const {
    return eval_node<T>(*node_, point);
  }

  double operator()(double x) const {
    const double p[1] = {x};
    return eval<double>(std::span<const double>(p, 1));
  }
  double operator()(std::span<const double> point) const { return eval<double>(point); }

  /// Value and derivative with respect to the one-dimensional variable.
  Dual jet(double x) const {
    const Dual p[1] = {Dual(x, 1.0)};
    return eval<Dual>(std::span<const Dual>(p, 1));
  }

  /// True when the tree never reads a coordinate (only |x| or constants).
  bool is_radial() const { return !reads_coordinates(*node_); }

  friend bool operator==(const Expr& a, const Expr& b) { return equal_nodes(*a.node_, *b.node_); }

 private:
  explicit Expr(NodePtr n) : node_(std::move(n)) {}

  template <class T>
  static T eval_node(const ExprNode& n, std::span<const T> pt) {
    using detail::value_of;
    switch (n.kind) {
      case ExprKind::constant:
        return T(n.value);
      case ExprKind::coordinate:
        if (n.index >= pt.size()) throw SpecError("coordinate index exceeds dimension");
        return pt[n.index];
      case ExprKind::radius: {
        if (pt.size() == 1) {
          const T& x = pt[0];
          return value_of(x) < 0.0 ? T(-x) : x;
        }
        T r2 = T(0.0);
        for (const T& c : pt) r2 = r2 + c * c;
        return detail::sqrt_(r2);
      }
      case ExprKind::power: {
        T u = eval_node<T>(*n.arg, pt);
        return detail::abs_pow(u - T(n.value), n.exponent);
      }
      case ExprKind::exponential:
        return detail::exp_(T(n.exponent) * eval_node<T>(*n.arg, pt));
      case ExprKind::logarithm:
        return detail::log_(eval_node<T>(*n.arg, pt));
      case ExprKind::polynomial: {
        T u = eval_node<T>(*n.arg, pt);
        T acc = T(n.coefficients.back());
        for (std::size_t k = n.coefficients.size() - 1; k-- > 0;)
          acc = acc * u + T(n.coefficients[k]);
        return acc;
      }
      case ExprKind::piecewise: {
        const double u = value_of(eval_node<T>(*n.arg, pt));
        const auto& bp = n.coefficients;
        const std::size_t j =
            static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), u) - bp.begin());
        return eval_node<T>(*n.children[j], pt);
      }
      case ExprKind::tabulated: {
        T u = eval_node<T>(*n.arg, pt);
        const auto& xs = n.coefficients;
        const auto& ys = n.table_y;
        const double uv = value_of(u);
        if (uv <= xs.front()) return T(ys.front());
        if (uv >= xs.back()) return T(ys.back());
        const std::size_t j =
            static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), uv) - xs.begin());
        const double slope = (ys[j] - ys[j - 1]) / (xs[j] - xs[j - 1]);
        return T(ys[j - 1]) + T(slope) * (u - T(xs[j - 1]));
      }
      case ExprKind::lattice_power: {
        T u = eval_node<T>(*n.arg, pt);
        const double p = n.pattern.nearest(value_of(u));
        return detail::abs_pow(u - T(p), n.exponent);
      }
      case ExprKind::sum: {
        T acc = T(0.0);
        for (const auto& c : n.children) acc = acc + eval_node<T>(*c, pt);
        return acc;
      }
      case ExprKind::product: {
        T acc = T(1.0);
        for (const auto& c : n.children) acc = acc * eval_node<T>(*c, pt);
        return acc;
      }
    }
    return T(std::numeric_limits<double>::quiet_NaN());
  }

  static bool reads_coordinates(const ExprNode& n) {
    if (n.kind == ExprKind::coordinate) return true;
    if (n.arg && reads_coordinates(*n.arg)) return true;
    for (const auto& c : n.children)
      if (reads_coordinates(*c)) return true;
    return false;
  }

  static bool equal_nodes(const ExprNode& a, const ExprNode& b) {
    if (&a == &b) return true;
    if (a.kind != b.kind || a.value != b.value || a.exponent != b.exponent ||
        a.index != b.index || a.coefficients != b.coefficients || a.table_y != b.table_y ||
        !(a.pattern == b.pattern) || a.children.size() != b.children.size() ||
        static_cast<bool>(a.arg) != static_cast<bool>(b.arg))
      return false;
    if (a.arg && !equal_nodes(*a.arg, *b.arg)) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
      if (!equal_nodes(*a.children[i], *b.children[i])) return false;
    return true;
  }

  NodePtr node_;
};

/// Singular points a tree declares on its own: powers and lattice powers whose
/// argument is the variable of interest (x for the line, |x| for radial use).
struct Singularities {
  std::vector<double> points;
  std::vector<PointPattern> patterns;

  void merge(const Singularities& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
    patterns.insert(patterns.end(), other.patterns.begin(), other.patterns.end());
    normalize();
  }

  void normalize() {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    std::vector<PointPattern> unique;
    for (const auto& p : patterns)
      if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
    patterns = std::move(unique);
  }

  bool contains(double x) const {
    for (double p : points)
      if (std::fabs(p - x) <= 1e-12 * std::max(1.0, std::fabs(x))) return true;
    for (const auto& pat : patterns)
      if (pat.contains(x)) return true;
    return false;
  }

  bool operator==(const Singularities&) const = default;
};

enum class SingularVariable { x, radius };

namespace detail {

inline bool is_variable(const ExprNode& n, SingularVariable var) {
  if (var == SingularVariable::x) return n.kind == ExprKind::coordinate && n.index == 0;
  return n.kind == ExprKind::radius;
}

inline void collect(const ExprNode& n, SingularVariable var, Singularities& out) {
  if (n.kind == ExprKind::power && n.exponent != 0.0 && is_variable(*n.arg, var))
    out.points.push_back(n.value);
  if (n.kind == ExprKind::lattice_power && n.exponent != 0.0 && is_variable(*n.arg, var))
    out.patterns.push_back(n.pattern);
  if (n.arg) collect(*n.arg, var, out);
  for (const auto& c : n.children) collect(*c, var, out);
}

}  // namespace detail

inline Singularities collect_singularities(const Expr& e,
                                           SingularVariable var = SingularVariable::x) {
  Singularities s;
  detail::collect(e.node(), var, s);
  s.normalize();
  return s;
}

/// A one-dimensional coefficient (sigma, phi) with its declared singular set.
class Coefficient {
 public:
  Coefficient() = default;
  explicit Coefficient(Expr e, Singularities extra = {})
      : expr_(std::move(e)), declared_(std::move(extra)) {
    declared_.merge(collect_singularities(expr_));
  }

  const Expr& expr() const { return expr_; }
  const Singularities& singularities() const { return declared_; }

  /// Value at x. Declared blow-ups yield +inf; any other non-finite value throws.
  double evaluate(double x) const {
    const double v = expr_(x);
    if (std::isfinite(v)) return v;
    if (declared_.contains(x)) return std::numeric_limits<double>::infinity();
    throw EvaluationError("non-finite coefficient value", x);
  }

  /// Value and derivative at a regular point.
  Dual jet(double x) const {
    const Dual j = expr_.jet(x);
    if (!std::isfinite(j.v) || !std::isfinite(j.d)) {
      if (declared_.contains(x)) throw EvaluationError("derivative requested at singular point", x);
      throw EvaluationError("non-finite coefficient derivative", x);
    }
    return j;
  }

  friend bool operator==(const Coefficient& a, const Coefficient& b) {
    return a.expr_ == b.expr_ && a.declared_ == b.declared_;
  }

 private:
  Expr expr_;
  Singularities declared_;
};

}  // namespace recur
