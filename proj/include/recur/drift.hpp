#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "recur/problem.hpp"

namespace recur {

/// Coefficients of the diffusion dX = b(X) dt + sqrt(sigma(X)) dW associated
/// with the form, whose generator is (sigma/2) f'' + b f'.
struct DriftField {
  std::function<double(double)> drift;
  std::function<double(double)> diffusion;
  // Both at once, {drift, diffusion}; the simulator prefers it when set.
  std::function<std::pair<double, double>(double)> both;
  bool requires_derivatives = true;
  std::vector<double> singular_points;
};

/// b = (sigma' + sigma phi'/phi) / 2, derivatives taken in forward mode.
inline DriftField drift_from_coefficients(const ProblemSpec& spec) {
  if (spec.domain == DomainKind::euclidean)
    throw SpecError("drift_from_coefficients needs a one-dimensional spec");
  DriftField field;
  const Coefficient sigma = spec.sigma;
  const Coefficient phi = spec.phi;
  const Singularities sing = spec.singularities();
  field.drift = [sigma, phi, sing](double x) {
    if (sing.contains(x)) throw EvaluationError("drift requested at singular point", x);
    const Dual s = sigma.jet(x);
    const Dual p = phi.jet(x);
    return 0.5 * (s.d + s.v * p.d / p.v);
  };
  field.diffusion = [sigma, sing](double x) {
    if (sing.contains(x)) throw EvaluationError("diffusion requested at singular point", x);
    return sigma.evaluate(x);
  };
  field.both = [sigma, phi, sing](double x) {
    if (sing.contains(x)) throw EvaluationError("drift requested at singular point", x);
    const Dual s = sigma.jet(x);
    const Dual p = phi.jet(x);
    return std::pair<double, double>{0.5 * (s.d + s.v * p.d / p.v), s.v};
  };
  field.singular_points = sing.points;
  return field;
}

/// Same drift by central differences of step h; used to audit the forward-mode path.
inline double central_difference_drift(const ProblemSpec& spec, double x, double h) {
  auto d = [h](const Coefficient& c, double at) {
    return (c.evaluate(at + h) - c.evaluate(at - h)) / (2.0 * h);
  };
  return 0.5 * (d(spec.sigma, x) + spec.sigma.evaluate(x) * d(spec.phi, x) / spec.phi.evaluate(x));
}

}  // namespace recur
