#pragma once

#include <map>
#include <string>
#include <vector>

#include "recur/divergence.hpp"
#include "recur/hamza.hpp"

namespace recur {

enum class VerdictKind { recurrent, inconclusive };

inline const char* to_string(VerdictKind k) {
  return k == VerdictKind::recurrent ? "Recurrent" : "Inconclusive";
}

/// One computed integral of a sequence; unreliable samples are kept for the
/// record but left out of the divergence fit.
struct SequenceSample {
  int n = 0;
  double value = 0.0;
  double error = 0.0;
  bool reliable = true;
  bool operator==(const SequenceSample&) const = default;
};

struct SequenceEvidence {
  std::string name;
  std::vector<SequenceSample> samples;
  DivergenceVerdict diagnosis;
  bool operator==(const SequenceEvidence&) const = default;
};

struct EnergyTracePoint {
  int n = 0;
  double closed_form = 0.0;  // value predicted by the construction (or its upper bound)
  double quadrature = 0.0;   // numerically integrated energy; NaN when only a bound exists
  bool operator==(const EnergyTracePoint& o) const {
    auto same = [](double a, double b) { return a == b || (a != a && b != b); };
    return n == o.n && same(closed_form, o.closed_form) && same(quadrature, o.quadrature);
  }
};

struct RecurrenceVerdict {
  VerdictKind kind = VerdictKind::inconclusive;
  std::string criterion;  // which theorem was applied: "line", "half-line", "radial", "envelope"
  CaseTag case_tag = CaseTag::none;
  int n_max = 0;
  std::string label;      // "numerical evidence at n_max=N"
  std::vector<SequenceEvidence> sequences;
  std::vector<EnergyTracePoint> energy_trace;
  bool transient_by_scale = false;
  std::vector<std::string> assumptions;
  std::vector<std::string> notes;
  std::map<std::string, std::vector<SequencePoint>> profiles;  // e.g. psi(r), b(r) samples

  bool operator==(const RecurrenceVerdict&) const = default;
};

inline std::vector<SequencePoint> fit_points(const std::vector<SequenceSample>& samples) {
  std::vector<SequencePoint> pts;
  for (const auto& s : samples)
    if (s.reliable) pts.push_back({static_cast<double>(s.n), s.value});
  return pts;
}

inline std::string evidence_label(int n_max) {
  return "numerical evidence at n_max=" + std::to_string(n_max);
}

}  // namespace recur
