#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "recur/divergence.hpp"
#include "recur/quadrature.hpp"

using namespace recur;

TEST(Integrate, InverseSquareRootWithSingularEndpoint) {
  const auto r = integrate([](double s) { return 1.0 / std::sqrt(s); }, 0.0, 1.0, 1e-10, Endpoint::left);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 2.0, 1e-8);
}

TEST(Integrate, Constant) {
  const auto r = integrate([](double) { return 1.0; }, 0.0, 1.0, 1e-12);
  EXPECT_NEAR(r.value, 1.0, 1e-15);
}

TEST(Integrate, Logarithm) {
  const auto r = integrate([](double s) { return 1.0 / s; }, 1.0, std::exp(1.0), 1e-12);
  EXPECT_NEAR(r.value, 1.0, 1e-10);
}

TEST(Integrate, ErrorEstimateBoundedWhenConverged) {
  for (double tol : {1e-6, 1e-10}) {
    const auto r = integrate([](double s) { return std::exp(-s) * std::cos(3 * s); }, 0.0, 5.0, tol);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.error_estimate, tol * std::max(1.0, std::fabs(r.value)));
    const double exact = (1.0 + std::exp(-5.0) * (3 * std::sin(15.0) - std::cos(15.0))) / 10.0;
    EXPECT_NEAR(r.value, exact, 10 * tol);
  }
}

TEST(Integrate, SingularRightEndpoint) {
  // int_0^1 (1 - s)^(-3/4) ds = 4
  const auto r = integrate([](double s) { return std::pow(1.0 - s, -0.75); }, 0.0, 1.0, 1e-10, Endpoint::right);
  EXPECT_NEAR(r.value, 4.0, 1e-7);
}

TEST(Integrate, StrongSingularityAwayFromOrigin) {
  // int_c^{c+1} (s - c)^(-0.9) ds = 10 and the mirrored version, for several c.
  for (double c : {1.0, 2.5, -7.0, 40.0}) {
    const auto r = integrate([c](double s) { return std::pow(s - c, -0.9); }, c, c + 1.0, 1e-10, Endpoint::left);
    EXPECT_TRUE(r.converged) << c;
    EXPECT_NEAR(r.value, 10.0, 1e-8) << c;
    const auto m = integrate([c](double s) { return std::pow(c - s, -0.9) * std::exp(c - s); }, c - 1.0, c,
                             1e-10, Endpoint::right);
    // int_0^1 t^(-0.9) e^t dt = sum_k 1 / (k! (k + 0.1))
    double series = 0.0, fact = 1.0;
    for (int k = 0; k < 30; ++k) {
      if (k > 0) fact *= k;
      series += 1.0 / (fact * (k + 0.1));
    }
    EXPECT_NEAR(m.value, series, 1e-8 * series) << c;
  }
}

TEST(Integrate, NonFiniteInteriorValueReportsPoint) {
  try {
    integrate([](double s) { return s > 0.3 ? std::numeric_limits<double>::infinity() : 1.0; }, 0.0, 1.0, 1e-8);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_GT(e.point(), 0.3);
  }
}

TEST(Integrate, RejectsReversedOrInfiniteLimits) {
  auto f = [](double) { return 1.0; };
  EXPECT_THROW(integrate(f, 1.0, 0.0, 1e-8), std::invalid_argument);
  EXPECT_THROW(integrate(f, 0.0, INFINITY, 1e-8), std::invalid_argument);
  EXPECT_EQ(integrate(f, 2.0, 2.0, 1e-8).value, 0.0);
}

TEST(Integrate, BudgetExhaustionIsReportedNotThrown) {
  const auto r = integrate([](double s) { return std::sin(1.0 / s); }, 1e-6, 1.0, 1e-14, Endpoint::none, 20);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(std::isfinite(r.value));
}

TEST(Integrate, DeterministicRepeatedCalls) {
  auto f = [](double s) { return std::pow(s, -0.3) * std::exp(s); };
  const auto a = integrate(f, 0.0, 2.0, 1e-9, Endpoint::left);
  const auto b = integrate(f, 0.0, 2.0, 1e-9, Endpoint::left);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.function_evals, b.function_evals);
}

namespace {

// Random integrands from the coefficient catalog on [lo, hi] with lo > 0, so
// that every entry is finite on the closed range except possibly at lo.
struct CatalogIntegrand {
  std::function<double(double)> f;
  double lo, hi;
  bool singular_lo;
};

CatalogIntegrand random_integrand(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> pick(0, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lo = u(gen) * 2.0, hi = lo + 0.5 + 3.0 * u(gen);
  const double p = -0.9 + 2.5 * u(gen), c = 0.5 + u(gen), k = -1.0 + 2.0 * u(gen);
  switch (pick(gen)) {
    case 0: return {[=](double s) { return std::pow(s - lo, p); }, lo, hi, p < 0};
    case 1: return {[=](double s) { return c * std::exp(k * s); }, lo, hi, false};
    case 2: return {[=](double s) { return std::log(1.0 + c * s); }, lo, hi, false};
    case 3: return {[=](double s) { return c + k * s + s * s; }, lo, hi, false};
    case 4: return {[=](double s) { return 1.0 / (c + s * s); }, lo, hi, false};
    default: return {[=](double s) { return std::pow(s - lo, p) * std::exp(k * s); }, lo, hi, p < 0};
  }
}

}  // namespace

TEST(IntegrateProperty, LinearityOverRandomCatalogIntegrands) {
  std::mt19937_64 gen(20240901);
  const double tol = 1e-9;
  for (int trial = 0; trial < 250; ++trial) {
    const auto g = random_integrand(gen);
    const Endpoint flags = g.singular_lo ? Endpoint::left : Endpoint::none;
    const auto base = integrate(g.f, g.lo, g.hi, tol, flags);
    for (double k : {2.0, 10.0}) {
      const auto scaled = integrate([&](double s) { return k * g.f(s); }, g.lo, g.hi, tol, flags);
      EXPECT_NEAR(scaled.value, k * base.value, tol * std::max(1.0, std::fabs(k * base.value)))
          << "trial " << trial;
    }
  }
}

TEST(IntegrateProperty, AdditivityOverRandomCatalogIntegrands) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  const double tol = 1e-9;
  for (int trial = 0; trial < 250; ++trial) {
    const auto g = random_integrand(gen);
    const Endpoint flags = g.singular_lo ? Endpoint::left : Endpoint::none;
    const double mid = g.lo + u(gen) * (g.hi - g.lo);
    const auto whole = integrate(g.f, g.lo, g.hi, tol, flags);
    const auto left = integrate(g.f, g.lo, mid, tol, flags);
    const auto right = integrate(g.f, mid, g.hi, tol);
    const double scale = std::max({1.0, std::fabs(left.value), std::fabs(right.value)});
    EXPECT_NEAR(left.value + right.value, whole.value, 2 * tol * scale) << "trial " << trial;
  }
}

TEST(IntegrateProperty, PowerOracleOverRandomOffsets) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double tol = 1e-9;
  for (int trial = 0; trial < 200; ++trial) {
    const double lo = -50.0 + 100.0 * u(gen), len = 0.1 + 4.0 * u(gen), p = -0.95 + 2.0 * u(gen);
    const bool right = u(gen) < 0.5;
    const double exact = std::pow(len, p + 1.0) / (p + 1.0);
    const auto r = right ? integrate([=](double s) { return std::pow(lo + len - s, p); }, lo, lo + len, tol,
                                     Endpoint::right)
                         : integrate([=](double s) { return std::pow(s - lo, p); }, lo, lo + len, tol,
                                     Endpoint::left);
    EXPECT_TRUE(r.converged) << "trial " << trial;
    EXPECT_NEAR(r.value, exact, tol * std::max(1.0, exact)) << "trial " << trial << " lo=" << lo << " p=" << p;
  }
}

TEST(LocalIntegrability, PowerFamilyThreshold) {
  for (double beta : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5}) {
    const auto r = local_integrability([beta](double s) { return std::pow(std::fabs(s), -beta); }, 0.0,
                                       Side::right, 0.5, 1e-8);
    EXPECT_EQ(r.status, beta < 1.0 ? Integrability::integrable : Integrability::non_integrable) << beta;
  }
}

TEST(LocalIntegrability, ValueOfIntegrableCase) {
  const double h0 = 0.5;
  const auto r = local_integrability([](double s) { return 1.0 / std::sqrt(s); }, 0.0, Side::right, h0, 1e-10);
  ASSERT_EQ(r.status, Integrability::integrable);
  EXPECT_NEAR(r.value, 2.0 * std::sqrt(h0), 1e-7);
}

TEST(LocalIntegrability, LeftSideAndOffsetCenter) {
  const auto r = local_integrability([](double s) { return 1.0 / std::fabs(s - 3.0); }, 3.0, Side::left, 0.5, 1e-8);
  EXPECT_EQ(r.status, Integrability::non_integrable);
  const auto q = local_integrability([](double s) { return std::pow(std::fabs(s - 3.0), -0.5); }, 3.0, Side::left,
                                     0.5, 1e-8);
  EXPECT_EQ(q.status, Integrability::integrable);
  EXPECT_NEAR(q.value, 2.0 * std::sqrt(0.5), 1e-6);
}

TEST(LocalIntegrability, ConstantIsIntegrable) {
  const auto r = local_integrability([](double) { return 1.0; }, 0.0, Side::right, 0.5, 1e-8);
  EXPECT_EQ(r.status, Integrability::integrable);
  EXPECT_NEAR(r.value, 0.5, 1e-10);
}

TEST(LocalIntegrability, LogarithmicBlowUpIsIntegrable) {
  const auto r = local_integrability([](double s) { return -std::log(s); }, 0.0, Side::right, 0.5, 1e-8);
  EXPECT_EQ(r.status, Integrability::integrable);
  EXPECT_NEAR(r.value, 0.5 - 0.5 * std::log(0.5), 1e-5);
}

namespace {

std::vector<SequencePoint> sample(const std::function<double(double)>& a, int n_max = 64) {
  std::vector<SequencePoint> out;
  for (int n = 1; n <= n_max; ++n) out.push_back({double(n), a(n)});
  return out;
}

}  // namespace

TEST(Divergence, LogarithmicGrowth) {
  const auto v = divergence_diagnose(sample([](double n) { return std::log(n); }));
  EXPECT_EQ(v.kind, DivergenceKind::diverges_to_infinity);
  EXPECT_EQ(v.model, GrowthModel::logarithmic);
  EXPECT_NEAR(v.exponent, 0.0, 0.05);
}

TEST(Divergence, LinearGrowth) {
  const auto v = divergence_diagnose(sample([](double n) { return n; }));
  EXPECT_EQ(v.kind, DivergenceKind::diverges_to_infinity);
  EXPECT_EQ(v.model, GrowthModel::power);
  EXPECT_NEAR(v.exponent, 1.0, 1e-3);
}

TEST(Divergence, ConvergentSequence) {
  const auto v = divergence_diagnose(sample([](double n) { return 1.0 - 1.0 / n; }));
  EXPECT_EQ(v.kind, DivergenceKind::bounded);
}

TEST(Divergence, ConstantSequenceIsBounded) {
  EXPECT_EQ(divergence_diagnose(sample([](double) { return 3.0; })).kind, DivergenceKind::bounded);
}

TEST(Divergence, ErraticSequenceIsUndetermined) {
  const auto v = divergence_diagnose(sample([](double n) { return n + 30.0 * std::sin(n); }));
  EXPECT_EQ(v.kind, DivergenceKind::undetermined);
}

TEST(Divergence, TooFewSamplesIsUndetermined) {
  EXPECT_EQ(divergence_diagnose(sample([](double n) { return n; }, 5)).kind, DivergenceKind::undetermined);
}

TEST(Divergence, ReportsThresholds) {
  DivergenceOptions opt;
  opt.divergence_floor = 50.0;
  opt.fit_tolerance = 3e-3;
  const auto v = divergence_diagnose(sample([](double n) { return n; }), opt);
  EXPECT_EQ(v.divergence_floor, 50.0);
  EXPECT_EQ(v.fit_tolerance, 3e-3);
  EXPECT_EQ(v.samples.size(), 64u);
}

TEST(Divergence, VerdictKindIsScaleEquivariant) {
  const std::vector<std::function<double(double)>> seqs = {
      [](double n) { return std::log(n); },       [](double n) { return n; },
      [](double n) { return std::sqrt(n) - 1; },  [](double n) { return 1.0 - 1.0 / n; },
      [](double n) { return 1.0 - 1.0 / (n * n); }, [](double n) { return std::log(1.0 + n); },
      [](double n) { return std::atan(n); },      [](double n) { return n + 30.0 * std::sin(n); }};
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto base = divergence_diagnose(sample(seqs[i])).kind;
    for (double k : {1e-6, 1e-3, 0.5, 7.0, 1e3, 1e6}) {
      const auto scaled = divergence_diagnose(sample([&](double n) { return k * seqs[i](n); }));
      EXPECT_EQ(scaled.kind, base) << "sequence " << i << " k=" << k;
    }
  }
}
