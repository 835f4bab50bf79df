#pragma once

// Spec files and reports as JSON.
//
// A spec file looks like
//   { "format": "recur-spec", "version": 1, "name": "...",
//     "domain": "line" | "half-line" | "euclidean", "dimension": d,
//     "sigma": <expr>, "phi": <expr>, ... }
// where an <expr> is a record with a "kind" tag, e.g.
//   { "kind": "power", "center": 0, "exponent": -0.5 }.
// Errors carry the JSON pointer of the offending field, or line and column
// for syntax errors.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "recur/hamza.hpp"
#include "recur/problem.hpp"
#include "recur/simulate.hpp"
#include "recur/verdict.hpp"

namespace recur {

using json = nlohmann::ordered_json;

inline constexpr const char* kSpecFormat = "recur-spec";
inline constexpr const char* kReportFormat = "recur-report";
inline constexpr int kFormatVersion = 1;

namespace io_detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw SpecError((path.empty() ? std::string("/") : path) + ": " + msg);
}

inline const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing field");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(path, "expected a number");
}

inline double number(const json& j, const std::string& path, const char* key) {
  return number(field(j, path, key), path + "/" + key);
}

inline double number_or(const json& j, const std::string& path, const char* key, double dflt) {
  return j.contains(key) ? number(j, path, key) : dflt;
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "/" + std::to_string(i)));
  return out;
}

inline std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline bool flag(const json& j, const std::string& path, const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_boolean()) fail(path + "/" + key, "expected true or false");
  return j[key].get<bool>();
}

inline std::uint64_t integer(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0))
    fail(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

/// Non-finite doubles become "nan"/"inf"/"-inf" strings; JSON has no literal for them.
inline json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline const char* extent_name(PatternExtent e) {
  switch (e) {
    case PatternExtent::both: return "both";
    case PatternExtent::right: return "right";
    case PatternExtent::left: return "left";
  }
  return "both";
}

inline PatternExtent extent_from(const std::string& s, const std::string& path) {
  if (s == "both") return PatternExtent::both;
  if (s == "right") return PatternExtent::right;
  if (s == "left") return PatternExtent::left;
  fail(path, "unknown pattern extent '" + s + "' (both, right, left)");
}

inline bool is_default_arg(const NodePtr& n) {
  return n && n->kind == ExprKind::coordinate && n->index == 0;
}

}  // namespace io_detail

inline json pattern_to_json(const PointPattern& p) {
  return json{{"origin", p.origin}, {"spacing", p.spacing}, {"extent", io_detail::extent_name(p.extent)}};
}

inline PointPattern pattern_from_json(const json& j, const std::string& path) {
  using namespace io_detail;
  PointPattern p;
  p.origin = number(j, path, "origin");
  p.spacing = number(j, path, "spacing");
  if (!(p.spacing > 0.0)) fail(path + "/spacing", "must be positive");
  if (j.contains("extent")) p.extent = extent_from(text(j["extent"], path + "/extent"), path + "/extent");
  return p;
}

inline json expr_to_json(const ExprNode& n) {
  using namespace io_detail;
  json j;
  auto with_arg = [&](json& out) {
    if (!is_default_arg(n.arg)) out["arg"] = expr_to_json(*n.arg);
  };
  auto list = [](const std::vector<NodePtr>& ch) {
    json a = json::array();
    for (const auto& c : ch) a.push_back(expr_to_json(*c));
    return a;
  };
  switch (n.kind) {
    case ExprKind::constant:
      j = {{"kind", "constant"}, {"value", num(n.value)}};
      break;
    case ExprKind::coordinate:
      j = {{"kind", "coordinate"}, {"index", n.index}};
      break;
    case ExprKind::radius:
      j = {{"kind", "radius"}};
      break;
    case ExprKind::power:
      j = {{"kind", "power"}, {"center", n.value}, {"exponent", n.exponent}};
      with_arg(j);
      break;
    case ExprKind::exponential:
      j = {{"kind", "exponential"}, {"scale", n.exponent}};
      with_arg(j);
      break;
    case ExprKind::logarithm:
      j = {{"kind", "logarithm"}};
      with_arg(j);
      break;
    case ExprKind::polynomial:
      j = {{"kind", "polynomial"}, {"coefficients", nums(n.coefficients)}};
      with_arg(j);
      break;
    case ExprKind::piecewise:
      j = {{"kind", "piecewise"}, {"breakpoints", nums(n.coefficients)}, {"pieces", list(n.children)}};
      with_arg(j);
      break;
    case ExprKind::tabulated:
      j = {{"kind", "tabulated"}, {"x", nums(n.coefficients)}, {"y", nums(n.table_y)}};
      with_arg(j);
      break;
    case ExprKind::lattice_power:
      j = {{"kind", "lattice-power"}, {"pattern", pattern_to_json(n.pattern)}, {"exponent", n.exponent}};
      with_arg(j);
      break;
    case ExprKind::sum:
      j = {{"kind", "sum"}, {"terms", list(n.children)}};
      break;
    case ExprKind::product:
      j = {{"kind", "product"}, {"factors", list(n.children)}};
      break;
  }
  return j;
}

inline json expr_to_json(const Expr& e) { return expr_to_json(e.node()); }

inline Expr expr_from_json(const json& j, const std::string& path) {
  using namespace io_detail;
  if (j.is_number()) return Expr::constant(j.get<double>());
  const std::string kind = text(field(j, path, "kind"), path + "/kind");
  auto arg = [&]() {
    return j.contains("arg") ? expr_from_json(j["arg"], path + "/arg") : Expr::x();
  };
  auto list = [&](const char* key) {
    const json& a = field(j, path, key);
    const std::string p = path + "/" + key;
    if (!a.is_array()) fail(p, "expected an array of expressions");
    std::vector<Expr> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(expr_from_json(a[i], p + "/" + std::to_string(i)));
    return out;
  };
  try {
    if (kind == "constant") return Expr::constant(number(j, path, "value"));
    if (kind == "coordinate")
      return Expr::coordinate(j.contains("index") ? integer(j["index"], path + "/index") : 0);
    if (kind == "x") return Expr::x();
    if (kind == "radius") return Expr::radius();
    if (kind == "power")
      return Expr::power(number_or(j, path, "center", 0.0), number(j, path, "exponent"), arg());
    if (kind == "exponential") return Expr::exponential(number(j, path, "scale"), arg());
    if (kind == "logarithm") return Expr::logarithm(arg());
    if (kind == "polynomial")
      return Expr::polynomial(numbers(field(j, path, "coefficients"), path + "/coefficients"), arg());
    if (kind == "piecewise")
      return Expr::piecewise(numbers(field(j, path, "breakpoints"), path + "/breakpoints"),
                             list("pieces"), arg());
    if (kind == "tabulated")
      return Expr::tabulated(numbers(field(j, path, "x"), path + "/x"),
                             numbers(field(j, path, "y"), path + "/y"), arg());
    if (kind == "lattice-power")
      return Expr::lattice_power(pattern_from_json(field(j, path, "pattern"), path + "/pattern"),
                                 number(j, path, "exponent"), arg());
    if (kind == "sum") return Expr::sum(list("terms"));
    if (kind == "product") return Expr::product(list("factors"));
  } catch (const SpecError& e) {
    const std::string what = e.what();
    if (!what.empty() && what[0] == '/') throw;
    fail(path, what);
  }
  fail(path + "/kind", "unknown expression kind '" + kind + "'");
}

inline const char* domain_name(DomainKind d) {
  switch (d) {
    case DomainKind::line: return "line";
    case DomainKind::half_line: return "half-line";
    case DomainKind::euclidean: return "euclidean";
  }
  return "line";
}

inline json singularities_to_json(const Singularities& s) {
  json pats = json::array();
  for (const auto& p : s.patterns) pats.push_back(pattern_to_json(p));
  return json{{"points", io_detail::nums(s.points)}, {"patterns", pats}};
}

inline Singularities singularities_from_json(const json& j, const std::string& path) {
  Singularities s;
  if (j.contains("points")) s.points = io_detail::numbers(j["points"], path + "/points");
  if (j.contains("patterns")) {
    const json& a = j["patterns"];
    if (!a.is_array()) io_detail::fail(path + "/patterns", "expected an array");
    for (std::size_t i = 0; i < a.size(); ++i)
      s.patterns.push_back(pattern_from_json(a[i], path + "/patterns/" + std::to_string(i)));
  }
  s.normalize();
  return s;
}

inline json options_to_json(const Options& o) {
  return json{{"tol", o.tol},
              {"n_max", o.n_max},
              {"window", json::array({o.window_lo, o.window_hi})},
              {"divergence_floor", o.divergence_floor},
              {"fit_tolerance", o.fit_tolerance},
              {"scale_probe", o.scale_probe},
              {"local_h0", o.local_h0}};
}

inline Options options_from_json(const json& j, const std::string& path) {
  using namespace io_detail;
  Options o;
  if (!j.is_object()) fail(path, "expected an object");
  o.tol = number_or(j, path, "tol", o.tol);
  if (j.contains("n_max")) o.n_max = static_cast<int>(integer(j["n_max"], path + "/n_max"));
  if (j.contains("window")) {
    const auto w = numbers(j["window"], path + "/window");
    if (w.size() != 2 || !(w[0] < w[1])) fail(path + "/window", "expected [lo, hi] with lo < hi");
    o.window_lo = w[0];
    o.window_hi = w[1];
  }
  o.divergence_floor = number_or(j, path, "divergence_floor", o.divergence_floor);
  o.fit_tolerance = number_or(j, path, "fit_tolerance", o.fit_tolerance);
  o.scale_probe = flag(j, path, "scale_probe", o.scale_probe);
  o.local_h0 = number_or(j, path, "local_h0", o.local_h0);
  if (!(o.tol > 0.0)) fail(path + "/tol", "must be positive");
  if (o.n_max < 8) fail(path + "/n_max", "must be at least 8");
  return o;
}

inline json sim_to_json(const SimConfig& c) {
  return json{{"x0", c.x0},
              {"dt", c.dt},
              {"horizon", c.horizon},
              {"n_paths", c.n_paths},
              {"seed", c.seed},
              {"target", json::array({c.target_lo, c.target_hi})},
              {"reflect", c.reflect},
              {"stop_at_return", c.stop_at_return}};
}

inline SimConfig sim_from_json(const json& j, const std::string& path) {
  using namespace io_detail;
  SimConfig c;
  if (!j.is_object()) fail(path, "expected an object");
  c.x0 = number_or(j, path, "x0", c.x0);
  c.dt = number_or(j, path, "dt", c.dt);
  c.horizon = number_or(j, path, "horizon", c.horizon);
  if (j.contains("n_paths")) c.n_paths = integer(j["n_paths"], path + "/n_paths");
  if (j.contains("seed")) c.seed = integer(j["seed"], path + "/seed");
  if (j.contains("target")) {
    const auto t = numbers(j["target"], path + "/target");
    if (t.size() != 2) fail(path + "/target", "expected [lo, hi]");
    c.target_lo = t[0];
    c.target_hi = t[1];
  }
  c.reflect = flag(j, path, "reflect", c.reflect);
  c.stop_at_return = flag(j, path, "stop_at_return", c.stop_at_return);
  if (j.contains("threads")) c.threads = static_cast<unsigned>(integer(j["threads"], path + "/threads"));
  try {
    validate(c);
  } catch (const SpecError& e) {
    fail(path, e.what());
  }
  return c;
}

inline json spec_to_json(const ProblemSpec& s) {
  json j;
  j["format"] = kSpecFormat;
  j["version"] = kFormatVersion;
  j["name"] = s.name;
  j["domain"] = domain_name(s.domain);
  j["dimension"] = s.dimension;
  j["sigma"] = expr_to_json(s.sigma.expr());
  j["phi"] = expr_to_json(s.phi.expr());
  // Declared singularities beyond those implied by the expressions.
  const Singularities implied_sigma = collect_singularities(s.sigma.expr());
  const Singularities implied_phi = collect_singularities(s.phi.expr());
  if (!(s.sigma.singularities() == implied_sigma))
    j["sigma_singularities"] = singularities_to_json(s.sigma.singularities());
  if (!(s.phi.singularities() == implied_phi))
    j["phi_singularities"] = singularities_to_json(s.phi.singularities());
  if (s.domain == DomainKind::euclidean) {
    json rows = json::array();
    for (std::size_t i = 0; i < s.dimension; ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < s.dimension; ++k) row.push_back(expr_to_json(s.matrix.at(i, k)));
      rows.push_back(row);
    }
    j["matrix"] = rows;
    if (s.ellipticity) j["ellipticity"] = expr_to_json(*s.ellipticity);
    if (s.envelope)
      j["envelope"] = json{{"bound", expr_to_json(s.envelope->phi_bound)}, {"rho", s.envelope->rho}};
  }
  if (s.simulation) j["simulation"] = sim_to_json(*s.simulation);
  j["options"] = options_to_json(s.options);
  return j;
}

inline ProblemSpec spec_from_json(const json& j) {
  using namespace io_detail;
  if (!j.is_object()) fail("", "spec must be a JSON object");
  if (text(field(j, "", "format"), "/format") != kSpecFormat)
    fail("/format", std::string("expected \"") + kSpecFormat + "\"");
  if (integer(field(j, "", "version"), "/version") != static_cast<std::uint64_t>(kFormatVersion))
    fail("/version", "unsupported version (expected 1)");
  ProblemSpec s;
  if (j.contains("name")) s.name = text(j["name"], "/name");
  const std::string dom = text(field(j, "", "domain"), "/domain");
  if (dom == "line") s.domain = DomainKind::line;
  else if (dom == "half-line") s.domain = DomainKind::half_line;
  else if (dom == "euclidean") s.domain = DomainKind::euclidean;
  else fail("/domain", "unknown domain '" + dom + "' (line, half-line, euclidean)");
  s.dimension = j.contains("dimension") ? integer(j["dimension"], "/dimension") : 1;
  if (s.domain == DomainKind::euclidean) {
    if (s.dimension < 2) fail("/dimension", "euclidean specs need dimension >= 2");
  } else if (s.dimension != 1) {
    fail("/dimension", "one-dimensional domains need dimension 1");
  }
  Singularities sigma_extra, phi_extra;
  if (j.contains("sigma_singularities"))
    sigma_extra = singularities_from_json(j["sigma_singularities"], "/sigma_singularities");
  if (j.contains("phi_singularities"))
    phi_extra = singularities_from_json(j["phi_singularities"], "/phi_singularities");
  if (j.contains("sigma")) s.sigma = Coefficient(expr_from_json(j["sigma"], "/sigma"), sigma_extra);
  s.phi = Coefficient(expr_from_json(field(j, "", "phi"), "/phi"), phi_extra);

  if (s.domain == DomainKind::euclidean) {
    s.matrix = SymmetricMatrix::identity(s.dimension);
    if (j.contains("matrix")) {
      const json& rows = j["matrix"];
      if (!rows.is_array() || rows.size() != s.dimension)
        fail("/matrix", "expected " + std::to_string(s.dimension) + " rows");
      std::vector<std::vector<Expr>> m(s.dimension);
      for (std::size_t i = 0; i < s.dimension; ++i) {
        const std::string rp = "/matrix/" + std::to_string(i);
        if (!rows[i].is_array() || rows[i].size() != s.dimension)
          fail(rp, "expected " + std::to_string(s.dimension) + " entries");
        for (std::size_t k = 0; k < s.dimension; ++k)
          m[i].push_back(expr_from_json(rows[i][k], rp + "/" + std::to_string(k)));
      }
      for (std::size_t i = 0; i < s.dimension; ++i)
        for (std::size_t k = i; k < s.dimension; ++k) {
          if (!(m[i][k] == m[k][i]))
            fail("/matrix/" + std::to_string(k) + "/" + std::to_string(i), "matrix must be symmetric");
          s.matrix.set(i, k, m[i][k]);
        }
    }
    if (j.contains("ellipticity")) s.ellipticity = expr_from_json(j["ellipticity"], "/ellipticity");
    if (j.contains("envelope")) {
      const json& e = j["envelope"];
      EnvelopeSpec env;
      env.phi_bound = expr_from_json(field(e, "/envelope", "bound"), "/envelope/bound");
      env.rho = number(e, "/envelope", "rho");
      if (!(env.rho > 0.0)) fail("/envelope/rho", "must be positive");
      env.dimension = s.dimension;
      s.envelope = env;
    }
  } else {
    for (const char* key : {"matrix", "ellipticity", "envelope"})
      if (j.contains(key)) fail(std::string("/") + key, "only allowed for euclidean specs");
  }
  if (j.contains("simulation")) s.simulation = sim_from_json(j["simulation"], "/simulation");
  if (j.contains("options")) s.options = options_from_json(j["options"], "/options");
  if (s.domain == DomainKind::half_line && s.options.window_lo < 0.0) s.options.window_lo = 0.0;
  return s;
}

/// Parses spec text; syntax errors are reported with line and column.
inline ProblemSpec parse_spec(const std::string& text_in, const std::string& source = "<spec>") {
  json j;
  try {
    j = json::parse(text_in);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text_in.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text_in[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SpecError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                    ": JSON syntax error");
  }
  try {
    return spec_from_json(j);
  } catch (const SpecError& e) {
    throw SpecError(source + ": " + e.what());
  }
}

inline ProblemSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open spec file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), path);
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- reports

inline json divergence_to_json(const DivergenceVerdict& d) {
  using io_detail::num;
  json pts = json::array();
  for (const auto& p : d.samples) pts.push_back(json::array({num(p.n), num(p.value)}));
  return json{{"kind", to_string(d.kind)},
              {"model", to_string(d.model)},
              {"exponent", num(d.exponent)},
              {"offset", num(d.offset)},
              {"scale", num(d.scale)},
              {"residual", num(d.residual)},
              {"growth_ratio", num(d.growth_ratio)},
              {"divergence_floor", num(d.divergence_floor)},
              {"fit_tolerance", num(d.fit_tolerance)},
              {"reason", d.reason},
              {"samples", pts}};
}

inline DivergenceVerdict divergence_from_json(const json& j, const std::string& path) {
  using namespace io_detail;
  DivergenceVerdict d;
  const std::string kind = text(field(j, path, "kind"), path + "/kind");
  if (kind == "DivergesToInfinity") d.kind = DivergenceKind::diverges_to_infinity;
  else if (kind == "Bounded") d.kind = DivergenceKind::bounded;
  else if (kind == "Undetermined") d.kind = DivergenceKind::undetermined;
  else fail(path + "/kind", "unknown divergence kind");
  const std::string model = text(field(j, path, "model"), path + "/model");
  if (model == "logarithmic") d.model = GrowthModel::logarithmic;
  else if (model == "power") d.model = GrowthModel::power;
  else if (model == "constant-tail") d.model = GrowthModel::constant_tail;
  else fail(path + "/model", "unknown growth model");
  d.exponent = number(j, path, "exponent");
  d.offset = number(j, path, "offset");
  d.scale = number(j, path, "scale");
  d.residual = number(j, path, "residual");
  d.growth_ratio = number(j, path, "growth_ratio");
  d.divergence_floor = number(j, path, "divergence_floor");
  d.fit_tolerance = number(j, path, "fit_tolerance");
  d.reason = text(field(j, path, "reason"), path + "/reason");
  const json& pts = field(j, path, "samples");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string p = path + "/samples/" + std::to_string(i);
    if (!pts[i].is_array() || pts[i].size() != 2) fail(p, "expected [n, value]");
    d.samples.push_back({number(pts[i][0], p + "/0"), number(pts[i][1], p + "/1")});
  }
  return d;
}

inline json decomposition_to_json(const IntervalDecomposition& dec) {
  using io_detail::num;
  json iv = json::array();
  for (const auto& i : dec.intervals) iv.push_back(json::array({num(i.lo), num(i.hi)}));
  auto tail = [](const Tail& t) {
    json o{{"kind", t.kind == TailKind::open ? "open" : "accumulating"}};
    if (t.pattern) o["pattern"] = pattern_to_json(*t.pattern);
    return o;
  };
  json anchors{{"a", num(dec.anchors.a)}, {"b", num(dec.anchors.b)}};
  if (dec.anchors.right)
    anchors["right"] = json{{"start", dec.anchors.right->start}, {"spacing", dec.anchors.right->spacing}};
  if (dec.anchors.left)
    anchors["left"] = json{{"start", dec.anchors.left->start}, {"spacing", dec.anchors.left->spacing}};
  return json{{"domain", domain_name(dec.domain)},
              {"case", to_string(dec.case_tag)},
              {"intervals", iv},
              {"complement_points", io_detail::nums(dec.complement_points)},
              {"ambiguous_points", io_detail::nums(dec.ambiguous_points)},
              {"left_tail", tail(dec.left_tail)},
              {"right_tail", tail(dec.right_tail)},
              {"anchors", anchors},
              {"notes", dec.notes}};
}

inline json verdict_to_json(const RecurrenceVerdict& v) {
  using io_detail::num;
  json seqs = json::array();
  for (const auto& s : v.sequences) {
    json samples = json::array();
    for (const auto& x : s.samples)
      samples.push_back(json{{"n", x.n}, {"value", num(x.value)}, {"error", num(x.error)}, {"reliable", x.reliable}});
    seqs.push_back(json{{"name", s.name}, {"samples", samples}, {"diagnosis", divergence_to_json(s.diagnosis)}});
  }
  json energy = json::array();
  for (const auto& e : v.energy_trace)
    energy.push_back(json{{"n", e.n}, {"closed_form", num(e.closed_form)}, {"quadrature", num(e.quadrature)}});
  json profiles = json::object();
  for (const auto& [name, pts] : v.profiles) {
    json a = json::array();
    for (const auto& p : pts) a.push_back(json::array({num(p.n), num(p.value)}));
    profiles[name] = a;
  }
  return json{{"kind", to_string(v.kind)},
              {"criterion", v.criterion},
              {"case", to_string(v.case_tag)},
              {"n_max", v.n_max},
              {"label", v.label},
              {"transient_by_scale", v.transient_by_scale},
              {"sequences", seqs},
              {"energy_trace", energy},
              {"assumptions", v.assumptions},
              {"notes", v.notes},
              {"profiles", profiles}};
}

inline RecurrenceVerdict verdict_from_json(const json& j, const std::string& path = "") {
  using namespace io_detail;
  RecurrenceVerdict v;
  const std::string kind = text(field(j, path, "kind"), path + "/kind");
  if (kind == "Recurrent") v.kind = VerdictKind::recurrent;
  else if (kind == "Inconclusive") v.kind = VerdictKind::inconclusive;
  else fail(path + "/kind", "unknown verdict kind");
  v.criterion = text(field(j, path, "criterion"), path + "/criterion");
  const auto tag = case_tag_from_string(text(field(j, path, "case"), path + "/case"));
  if (!tag) fail(path + "/case", "unknown case tag");
  v.case_tag = *tag;
  v.n_max = static_cast<int>(integer(field(j, path, "n_max"), path + "/n_max"));
  v.label = text(field(j, path, "label"), path + "/label");
  v.transient_by_scale = flag(j, path, "transient_by_scale", false);
  const json& seqs = field(j, path, "sequences");
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const std::string p = path + "/sequences/" + std::to_string(i);
    SequenceEvidence s;
    s.name = text(field(seqs[i], p, "name"), p + "/name");
    const json& samples = field(seqs[i], p, "samples");
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const std::string q = p + "/samples/" + std::to_string(k);
      SequenceSample x;
      x.n = static_cast<int>(field(samples[k], q, "n").get<long long>());
      x.value = number(samples[k], q, "value");
      x.error = number(samples[k], q, "error");
      x.reliable = flag(samples[k], q, "reliable", true);
      s.samples.push_back(x);
    }
    s.diagnosis = divergence_from_json(field(seqs[i], p, "diagnosis"), p + "/diagnosis");
    v.sequences.push_back(std::move(s));
  }
  const json& energy = field(j, path, "energy_trace");
  for (std::size_t i = 0; i < energy.size(); ++i) {
    const std::string p = path + "/energy_trace/" + std::to_string(i);
    v.energy_trace.push_back({static_cast<int>(field(energy[i], p, "n").get<long long>()),
                              number(energy[i], p, "closed_form"), number(energy[i], p, "quadrature")});
  }
  for (const auto& a : field(j, path, "assumptions")) v.assumptions.push_back(a.get<std::string>());
  for (const auto& n : field(j, path, "notes")) v.notes.push_back(n.get<std::string>());
  const json& profiles = field(j, path, "profiles");
  for (auto it = profiles.begin(); it != profiles.end(); ++it) {
    auto& dst = v.profiles[it.key()];
    for (const auto& pt : it.value())
      dst.push_back({number(pt[0], path + "/profiles"), number(pt[1], path + "/profiles")});
  }
  return v;
}

/// Report written by the classify command: the verdict plus context.
inline json report_to_json(const ProblemSpec& spec, const RecurrenceVerdict& v,
                           const IntervalDecomposition* dec = nullptr) {
  json j;
  j["format"] = kReportFormat;
  j["version"] = kFormatVersion;
  j["spec"] = spec.name;
  j["verdict"] = verdict_to_json(v);
  if (dec) j["decomposition"] = decomposition_to_json(*dec);
  return j;
}

inline RecurrenceVerdict verdict_from_report(const json& j) {
  using namespace io_detail;
  if (text(field(j, "", "format"), "/format") != kReportFormat)
    fail("/format", std::string("expected \"") + kReportFormat + "\"");
  return verdict_from_json(field(j, "", "verdict"), "/verdict");
}

inline json estimate_to_json(const RecurrenceEstimate& e) {
  using io_detail::num;
  return json{{"return_probability", num(e.return_probability)},
              {"ci_halfwidth", num(e.ci_halfwidth)},
              {"mean_occupation", num(e.mean_occupation)},
              {"completed", e.completed},
              {"returned", e.returned},
              {"aborted", e.aborted},
              {"unresolved", e.unresolved},
              {"horizon", num(e.horizon)},
              {"excursion_note", e.excursion_note},
              {"label", e.label}};
}

}  // namespace recur
