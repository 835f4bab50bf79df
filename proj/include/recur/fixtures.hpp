#pragma once

// The bundled example specs. `recur fixtures` writes these to fixtures/.

#include <cmath>
#include <string>
#include <vector>

#include "recur/problem.hpp"

namespace recur {

/// Bessel process of dimension delta: half-line, sigma = 1, phi = x^(delta-1).
inline ProblemSpec bessel_spec(double delta) {
  ProblemSpec s;
  char name[32];
  std::snprintf(name, sizeof name, "bessel-%g", delta);
  s.name = name;
  s.domain = DomainKind::half_line;
  s.phi = Coefficient(Expr::power(0.0, delta - 1.0));
  s.options.window_lo = 0.0;
  SimConfig sim;
  sim.x0 = 2.0;
  sim.target_lo = 0.0;
  sim.target_hi = 1.0;
  sim.reflect = true;
  sim.stop_at_return = true;
  s.simulation = sim;
  return s;
}

/// phi = dist(x, Z)^alpha: the integer lattice is singular for alpha >= 1.
inline ProblemSpec lattice_spec(double alpha) {
  ProblemSpec s;
  char name[32];
  std::snprintf(name, sizeof name, "lattice-alpha-%g", alpha);
  s.name = name;
  s.phi = Coefficient(Expr::lattice_power({0.0, 1.0, PatternExtent::both}, alpha));
  return s;
}

inline ProblemSpec brownian_spec() {
  ProblemSpec s;
  s.name = "brownian";
  SimConfig sim;
  sim.x0 = 2.0;
  sim.target_lo = -1.0;
  sim.target_hi = 1.0;
  sim.stop_at_return = true;
  s.simulation = sim;
  return s;
}

inline ProblemSpec quadratic_sigma_spec() {
  ProblemSpec s;
  s.name = "sigma-one-plus-x2";
  s.sigma = Coefficient(Expr::polynomial({1.0, 0.0, 1.0}));
  return s;
}

/// phi = exp(x^2): 1/(sigma phi) is integrable, so the scale is bounded.
inline ProblemSpec gaussian_weight_spec() {
  ProblemSpec s;
  s.name = "exp-x2";
  s.phi = Coefficient(Expr::exponential(1.0, Expr::power(0.0, 2.0)));
  return s;
}

/// Identity matrix and phi = 1 on R^d, with the envelope bound ||I|| = sqrt(d).
inline ProblemSpec identity_spec(std::size_t d) {
  ProblemSpec s;
  s.name = "identity-" + std::to_string(d) + "d";
  s.domain = DomainKind::euclidean;
  s.dimension = d;
  s.matrix = SymmetricMatrix::identity(d);
  s.options.window_lo = 0.0;
  s.envelope = EnvelopeSpec{Expr::constant(std::sqrt(static_cast<double>(d))), 1.0, d};
  return s;
}

/// phi = 1 + x_1^2/|x|^2 on R^2: not radial, psi(r) = 3 pi r.
inline ProblemSpec anisotropic_plane_spec() {
  ProblemSpec s;
  s.name = "anisotropic-2d";
  s.domain = DomainKind::euclidean;
  s.dimension = 2;
  s.phi = Coefficient(Expr::sum(
      {Expr::constant(1.0),
       Expr::product({Expr::power(0.0, 2.0, Expr::coordinate(0)), Expr::power(0.0, -2.0, Expr::radius())})}));
  s.matrix = SymmetricMatrix::identity(2);
  s.options.window_lo = 0.0;
  s.envelope = EnvelopeSpec{Expr::constant(2.0 * std::sqrt(2.0)), 1.0, 2};
  return s;
}

/// A = (1 + |x|^2) I, phi = 1 on R^2: b(r) = 1 + r^2 outgrows a_n ~ log n.
inline ProblemSpec growing_matrix_spec() {
  ProblemSpec s;
  s.name = "growing-matrix-2d";
  s.domain = DomainKind::euclidean;
  s.dimension = 2;
  s.matrix = SymmetricMatrix::scalar(2, Expr::sum({Expr::constant(1.0), Expr::power(0.0, 2.0, Expr::radius())}));
  s.ellipticity = Expr::polynomial({1.0, 0.0, 1.0});
  s.options.window_lo = 0.0;
  return s;
}

inline std::vector<ProblemSpec> bundled_fixtures() {
  std::vector<ProblemSpec> out;
  for (double delta : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) out.push_back(bessel_spec(delta));
  out.push_back(lattice_spec(1.0));
  out.push_back(lattice_spec(2.0));
  out.push_back(brownian_spec());
  out.push_back(quadratic_sigma_spec());
  out.push_back(gaussian_weight_spec());
  out.push_back(identity_spec(2));
  out.push_back(identity_spec(3));
  out.push_back(anisotropic_plane_spec());
  out.push_back(growing_matrix_spec());
  return out;
}

/// sigma phi multiplied by c (phi and any envelope bound for R^d).
inline ProblemSpec scaled_spec(const ProblemSpec& s, double c) {
  ProblemSpec out = s;
  out.phi = Coefficient(Expr::product({Expr::constant(c), s.phi.expr()}), s.phi.singularities());
  if (out.envelope)
    out.envelope->phi_bound = Expr::product({Expr::constant(c), s.envelope->phi_bound});
  return out;
}

}  // namespace recur
