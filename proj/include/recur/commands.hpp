#pragma once

// Command-line front end. run_cli is kept separate from main() so the tests
// can drive it in-process.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "recur/fixtures.hpp"
#include "recur/io.hpp"
#include "recur/line.hpp"
#include "recur/radial.hpp"
#include "recur/simulate.hpp"

namespace recur {

enum ExitCode : int { exit_ok = 0, exit_mismatch = 1, exit_spec_error = 2, exit_numerical = 3 };

inline constexpr const char* kOutDirEnv = "RECUR_OUT_DIR";

struct RunManifest {
  std::string command;
  std::string spec_path;
  std::string out_dir;
  std::optional<int> n_max;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<double> horizon;
  std::optional<unsigned> threads;
  bool scale_probe = false;
  std::string check_dir;
};

struct Classification {
  ProblemSpec spec;
  std::optional<IntervalDecomposition> decomposition;
  RecurrenceVerdict verdict;
};

inline Classification classify_spec(const ProblemSpec& spec) {
  Classification c{spec, std::nullopt, {}};
  if (spec.domain == DomainKind::euclidean) {
    c.verdict = classify_euclidean(spec);
  } else {
    auto [dec, v] = classify_1d(spec);
    c.decomposition = std::move(dec);
    c.verdict = std::move(v);
  }
  return c;
}

inline std::string summary_text(const ProblemSpec& spec, const RecurrenceVerdict& v) {
  std::ostringstream os;
  os << "spec: " << spec.name << " (" << domain_name(spec.domain);
  if (spec.domain == DomainKind::euclidean) os << ", d=" << spec.dimension;
  os << ")\n";
  os << "verdict: " << to_string(v.kind) << " (" << v.label << ")\n";
  os << "criterion: " << v.criterion << ", case " << to_string(v.case_tag) << "\n";
  if (v.transient_by_scale) os << "flag: TransientByScale\n";
  for (const auto& s : v.sequences) {
    os << "  " << s.name << ": " << to_string(s.diagnosis.kind) << ", model "
       << to_string(s.diagnosis.model) << ", p=" << format_number(s.diagnosis.exponent)
       << ", growth ratio " << format_number(s.diagnosis.growth_ratio);
    if (!s.samples.empty())
      os << ", last value " << format_number(s.samples.back().value) << " at n=" << s.samples.back().n;
    os << "\n";
  }
  for (const auto& a : v.assumptions) os << "assumption: " << a << "\n";
  for (const auto& n : v.notes) os << "note: " << n << "\n";
  return os.str();
}

namespace cli_detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

inline std::filesystem::path out_dir(const RunManifest& m) {
  std::filesystem::path dir = m.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? env : ".";
  }
  std::filesystem::create_directories(dir);
  return dir;
}

inline ProblemSpec load_with_overrides(const RunManifest& m) {
  if (m.spec_path.empty()) throw SpecError("--spec is required");
  ProblemSpec spec = load_spec(m.spec_path);
  if (m.n_max) {
    if (*m.n_max < 8) throw SpecError("--n-max must be at least 8");
    spec.options.n_max = *m.n_max;
  }
  if (m.tol) {
    if (!(*m.tol > 0.0)) throw SpecError("--tol must be positive");
    spec.options.tol = *m.tol;
  }
  if (m.scale_probe) spec.options.scale_probe = true;
  return spec;
}

inline SimConfig sim_config(const ProblemSpec& spec, const RunManifest& m) {
  SimConfig cfg = spec.simulation.value_or(SimConfig{});
  if (!spec.simulation && spec.domain == DomainKind::half_line) {
    cfg.reflect = true;
    cfg.target_lo = 0.0;
  }
  if (m.seed) cfg.seed = *m.seed;
  if (m.paths) cfg.n_paths = *m.paths;
  if (m.horizon) cfg.horizon = *m.horizon;
  if (m.threads) cfg.threads = *m.threads;
  validate(cfg);
  return cfg;
}

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace cli_detail

inline int cmd_classify(const RunManifest& m, std::ostream& out) {
  const ProblemSpec spec = cli_detail::load_with_overrides(m);
  const Classification c = classify_spec(spec);
  const auto dir = cli_detail::out_dir(m);
  const json report = report_to_json(spec, c.verdict, c.decomposition ? &*c.decomposition : nullptr);
  const std::string summary = summary_text(spec, c.verdict);
  cli_detail::write_file(dir / (spec.name + ".report.json"), dump(report));
  cli_detail::write_file(dir / (spec.name + ".summary.txt"), summary);
  out << summary;
  return exit_ok;
}

/// CSV with one row per n: the sequences, the closed-form energy of u_n, its
/// quadrature and the tolerance the two are held to.
inline std::string energy_trace_csv(const RecurrenceVerdict& v, double rel_tol = 1e-6) {
  std::ostringstream os;
  os << "n";
  for (const auto& s : v.sequences) os << "," << s.name;
  os << ",closed_form_energy,quadrature_energy,tolerance\n";
  for (const auto& e : v.energy_trace) {
    os << e.n;
    for (const auto& s : v.sequences) {
      os << ",";
      for (const auto& x : s.samples)
        if (x.n == e.n) os << cli_detail::csv_number(x.value);
    }
    os << "," << cli_detail::csv_number(e.closed_form) << "," << cli_detail::csv_number(e.quadrature)
       << "," << cli_detail::csv_number(rel_tol * std::fabs(e.closed_form)) << "\n";
  }
  return os.str();
}

inline int cmd_energy_trace(const RunManifest& m, std::ostream& out) {
  const ProblemSpec spec = cli_detail::load_with_overrides(m);
  if (spec.domain == DomainKind::euclidean)
    throw SpecError("energy-trace needs a one-dimensional spec");
  const Classification c = classify_spec(spec);
  if (c.verdict.case_tag == CaseTag::none)
    throw SpecError("energy-trace needs a spec whose Hamza set matches a case");
  const std::string csv = energy_trace_csv(c.verdict);
  cli_detail::write_file(cli_detail::out_dir(m) / (spec.name + ".energy.csv"), csv);
  out << csv;
  return exit_ok;
}

inline int cmd_simulate(const RunManifest& m, std::ostream& out) {
  const ProblemSpec spec = cli_detail::load_with_overrides(m);
  if (spec.domain == DomainKind::euclidean) throw SpecError("simulation is one-dimensional only");
  const SimConfig cfg = cli_detail::sim_config(spec, m);
  std::vector<PathSummary> paths;
  const RecurrenceEstimate est = estimate_return(drift_from_coefficients(spec), cfg, &paths);
  const auto dir = cli_detail::out_dir(m);
  std::ostringstream csv;
  write_paths_csv(csv, paths);
  cli_detail::write_file(dir / (spec.name + ".paths.csv"), csv.str());
  json summary{{"spec", spec.name}, {"simulation", sim_to_json(cfg)}, {"estimate", estimate_to_json(est)}};
  cli_detail::write_file(dir / (spec.name + ".simulation.json"), dump(summary));
  out << dump(summary);
  return exit_ok;
}

inline int cmd_corroborate(const RunManifest& m, std::ostream& out) {
  ProblemSpec spec = cli_detail::load_with_overrides(m);
  if (spec.domain == DomainKind::euclidean) throw SpecError("simulation is one-dimensional only");
  spec.options.scale_probe = true;
  const SimConfig cfg = cli_detail::sim_config(spec, m);
  const Classification c = classify_spec(spec);
  std::optional<double> ever;
  if (c.verdict.transient_by_scale && cfg.x0 > cfg.target_hi)
    ever = scale_hitting_probability(spec, cfg.x0, cfg.target_hi);
  const CorroborationReport rep = corroborate(c.verdict, drift_from_coefficients(spec), cfg, ever);
  json j{{"spec", spec.name},
         {"verdict", to_string(c.verdict.kind)},
         {"transient_by_scale", c.verdict.transient_by_scale},
         {"agreement", rep.agreement},
         {"statement", rep.statement},
         {"caveat", rep.caveat},
         {"simulation", sim_to_json(cfg)},
         {"estimate", estimate_to_json(rep.estimate)}};
  if (ever) j["ever_hit_probability"] = *ever;
  cli_detail::write_file(cli_detail::out_dir(m) / (spec.name + ".corroboration.json"), dump(j));
  out << dump(j);
  return exit_ok;
}

/// Writes every bundled spec; with a check directory, compares instead and
/// reports files that differ.
inline int cmd_fixtures(const RunManifest& m, std::ostream& out) {
  int status = exit_ok;
  std::filesystem::path dir;
  if (m.check_dir.empty()) {
    dir = cli_detail::out_dir(m);
  } else {
    dir = m.check_dir;
  }
  for (const auto& spec : bundled_fixtures()) {
    const std::string text = dump(spec_to_json(spec));
    const auto path = dir / (spec.name + ".json");
    if (m.check_dir.empty()) {
      cli_detail::write_file(path, text);
      out << "wrote " << path.string() << "\n";
      continue;
    }
    std::ifstream in(path, std::ios::binary);
    std::ostringstream existing;
    existing << in.rdbuf();
    if (!in || existing.str() != text) {
      out << "differs: " << path.string() << "\n";
      status = exit_mismatch;
    } else {
      out << "same: " << path.string() << "\n";
    }
  }
  return status;
}

/// Parses arguments and dispatches. Exit codes: 0 success, 1 fixture
/// mismatch, 2 specification or usage error, 3 numerical failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Recurrence criteria for gradient-type Dirichlet forms"};
  app.require_subcommand(1);
  RunManifest m;

  auto common = [&m](CLI::App* sub, bool needs_spec) {
    auto* s = sub->add_option("--spec", m.spec_path, "spec file (JSON)");
    if (needs_spec) s->required()->check(CLI::ExistingFile);
    sub->add_option("--out", m.out_dir, std::string("output directory (default $") + kOutDirEnv + " or .)");
  };
  auto tuning = [&m](CLI::App* sub) {
    sub->add_option_function<int>("--n-max", [&m](int v) { m.n_max = v; }, "largest n");
    sub->add_option_function<double>("--tol", [&m](double v) { m.tol = v; }, "quadrature tolerance");
    sub->add_flag("--enable-scale-probe", m.scale_probe, "flag transience when every scale integral is bounded");
  };
  auto sim = [&m](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>("--seed", [&m](std::uint64_t v) { m.seed = v; }, "RNG seed");
    sub->add_option_function<std::size_t>("--paths", [&m](std::size_t v) { m.paths = v; }, "number of paths");
    sub->add_option_function<double>("--horizon", [&m](double v) { m.horizon = v; }, "time horizon T");
    sub->add_option_function<unsigned>("--threads", [&m](unsigned v) { m.threads = v; }, "worker threads (0: all cores)");
  };

  auto* classify = app.add_subcommand("classify", "classify a spec and write its report");
  common(classify, true);
  tuning(classify);
  auto* energy = app.add_subcommand("energy-trace", "write the energy identity trace as CSV");
  common(energy, true);
  tuning(energy);
  auto* simulate = app.add_subcommand("simulate", "simulate the associated diffusion");
  common(simulate, true);
  tuning(simulate);
  sim(simulate);
  auto* corr = app.add_subcommand("corroborate", "compare a verdict with simulated return statistics");
  common(corr, true);
  tuning(corr);
  sim(corr);
  auto* fixtures = app.add_subcommand("fixtures", "write the bundled example specs");
  common(fixtures, false);
  fixtures->add_option("--check", m.check_dir, "compare against the specs in this directory instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_spec_error;
  }

  try {
    if (*classify) return cmd_classify(m, out);
    if (*energy) return cmd_energy_trace(m, out);
    if (*simulate) return cmd_simulate(m, out);
    if (*corr) return cmd_corroborate(m, out);
    if (*fixtures) return cmd_fixtures(m, out);
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return exit_spec_error;
  } catch (const EvaluationError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  }
  return exit_spec_error;
}

}  // namespace recur
