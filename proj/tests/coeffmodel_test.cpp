#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "recur/drift.hpp"
#include "recur/hamza.hpp"

using namespace recur;

namespace {

ProblemSpec line_spec(Expr phi, Expr sigma = Expr::constant(1.0)) {
  ProblemSpec s;
  s.sigma = Coefficient(std::move(sigma));
  s.phi = Coefficient(std::move(phi));
  return s;
}

}  // namespace

TEST(Evaluate, PowerAtRegularPoint) {
  Coefficient c(Expr::power(1.0, 2.0));
  EXPECT_DOUBLE_EQ(c.evaluate(3.0), 4.0);
}

TEST(Evaluate, DeclaredBlowUpGivesInfinity) {
  Coefficient c(Expr::power(1.0, -1.0));
  EXPECT_EQ(c.evaluate(1.0), std::numeric_limits<double>::infinity());
}

TEST(Evaluate, ProductOfPowerAndConstant) {
  Coefficient c(Expr::product({Expr::power(0.0, 1.0), Expr::constant(1.0)}));
  EXPECT_DOUBLE_EQ(c.evaluate(0.5), 0.5);
}

TEST(Evaluate, UndeclaredNonFiniteThrowsWithPoint) {
  // log(x) at 0 is -inf and nothing declares 0.
  Coefficient c(Expr::logarithm());
  try {
    c.evaluate(0.0);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.point(), 0.0);
  }
}

TEST(Evaluate, CatalogMatchesDirectFormulas) {
  EXPECT_NEAR(Expr::exponential(0.5)(2.0), std::exp(1.0), 1e-15);
  EXPECT_NEAR(Expr::logarithm()(std::exp(2.0)), 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(Expr::polynomial({1.0, -2.0, 3.0})(2.0), 1.0 - 4.0 + 12.0);
  const Expr pw = Expr::piecewise({0.0, 1.0}, {Expr::constant(-1.0), Expr::x(), Expr::constant(5.0)});
  EXPECT_DOUBLE_EQ(pw(-3.0), -1.0);
  EXPECT_DOUBLE_EQ(pw(0.25), 0.25);
  EXPECT_DOUBLE_EQ(pw(2.0), 5.0);
  const Expr tab = Expr::tabulated({0.0, 1.0, 3.0}, {1.0, 3.0, 7.0});
  EXPECT_DOUBLE_EQ(tab(0.5), 2.0);
  EXPECT_DOUBLE_EQ(tab(2.0), 5.0);
}

TEST(Evaluate, LatticePowerIsDistanceToLattice) {
  const Expr e = Expr::lattice_power({0.0, 1.0, PatternExtent::both}, 1.0);
  for (double x : {0.1, 0.4, 2.75, -3.2}) {
    const double dist = std::fabs(x - std::round(x));
    EXPECT_NEAR(e(x), dist, 1e-14) << x;
  }
}

TEST(Evaluate, RadiusAndCoordinates) {
  const double p[3] = {3.0, 4.0, 12.0};
  EXPECT_DOUBLE_EQ(Expr::radius().eval<double>(std::span<const double>(p, 3)), 13.0);
  EXPECT_DOUBLE_EQ(Expr::coordinate(2).eval<double>(std::span<const double>(p, 3)), 12.0);
  EXPECT_TRUE(Expr::power(0.0, 2.0, Expr::radius()).is_radial());
  EXPECT_FALSE(Expr::coordinate(1).is_radial());
}

TEST(Jet, DerivativeMatchesCentralDifference) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  const Expr e = Expr::sum({Expr::product({Expr::power(0.0, 1.5), Expr::exponential(-0.3)}),
                            Expr::logarithm(Expr::polynomial({2.0, 1.0}))});
  for (int i = 0; i < 50; ++i) {
    const double x = u(gen), h = 1e-5;
    const double fd = (e(x + h) - e(x - h)) / (2 * h);
    EXPECT_NEAR(e.jet(x).d, fd, 1e-7 * std::max(1.0, std::fabs(fd)));
  }
}

TEST(Singularities, CollectedFromPowersAndLattices) {
  const Expr e = Expr::product({Expr::power(2.0, -1.0), Expr::lattice_power({0.5, 2.0}, 3.0)});
  const Singularities s = collect_singularities(e);
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_EQ(s.points[0], 2.0);
  ASSERT_EQ(s.patterns.size(), 1u);
  EXPECT_TRUE(s.contains(4.5));
  EXPECT_TRUE(s.contains(-1.5));
  EXPECT_FALSE(s.contains(1.0));
}

TEST(Singularities, PositiveExponentsStillDeclareZeros) {
  // phi = |x|^1 vanishes at 0, which matters for 1/(sigma phi).
  const Singularities s = collect_singularities(Expr::power(0.0, 1.0));
  EXPECT_TRUE(s.contains(0.0));
}

TEST(SymmetricMatrixTest, MirroredEntriesShareOneExpression) {
  SymmetricMatrix m(3);
  m.set(0, 2, Expr::power(0.0, 2.0, Expr::radius()));
  EXPECT_TRUE(m.at(0, 2).same_node(m.at(2, 0)));
  EXPECT_TRUE(m.at(1, 1) == Expr::constant(1.0));
}

TEST(DetectHamza, LinearPhiSplitsAtZero) {
  const auto dec = detect_hamza_set(line_spec(Expr::power(0.0, 1.0)));
  EXPECT_EQ(dec.case_tag, CaseTag::line_ii);
  EXPECT_EQ(dec.anchors.a, 0.0);
  EXPECT_EQ(dec.anchors.b, 0.0);
  ASSERT_EQ(dec.intervals.size(), 2u);
  EXPECT_EQ(dec.intervals[0].hi, 0.0);
  EXPECT_EQ(dec.intervals[1].lo, 0.0);
  EXPECT_TRUE(std::isinf(dec.intervals[0].lo));
}

TEST(DetectHamza, SquareRootPhiKeepsZero) {
  const auto dec = detect_hamza_set(line_spec(Expr::power(0.0, 0.5)));
  EXPECT_EQ(dec.case_tag, CaseTag::line_i);
  ASSERT_EQ(dec.intervals.size(), 1u);
  EXPECT_TRUE(dec.complement_points.empty());
}

TEST(DetectHamza, ConstantCoefficients) {
  const auto dec = detect_hamza_set(line_spec(Expr::constant(1.0)));
  EXPECT_EQ(dec.case_tag, CaseTag::line_i);
}

TEST(DetectHamza, LatticeIsRemovedForAlphaAtLeastOne) {
  for (double alpha : {1.0, 2.0}) {
    const auto dec = detect_hamza_set(line_spec(Expr::lattice_power({0.0, 1.0}, alpha)));
    EXPECT_EQ(dec.case_tag, CaseTag::line_iii) << alpha;
    // U = R \ Z inside the window: unit intervals between consecutive integers.
    std::vector<double> expected;
    for (int k = -10; k <= 10; ++k) expected.push_back(k);
    EXPECT_EQ(dec.complement_points, expected);
    for (const auto& iv : dec.intervals) {
      if (std::isinf(iv.lo) || std::isinf(iv.hi)) continue;
      EXPECT_DOUBLE_EQ(iv.hi - iv.lo, 1.0);
    }
    EXPECT_EQ(dec.left_tail.kind, TailKind::accumulating);
    EXPECT_EQ(dec.right_tail.kind, TailKind::accumulating);
  }
}

TEST(DetectHamza, PowerAtCenterExcludedIffExponentAtLeastOne) {
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    const auto dec = detect_hamza_set(line_spec(Expr::power(3.0, alpha)));
    const bool removed = std::find(dec.complement_points.begin(), dec.complement_points.end(), 3.0) !=
                         dec.complement_points.end();
    EXPECT_EQ(removed, alpha >= 1.0) << alpha;
  }
}

TEST(DetectHamza, InvariantUnderScaling) {
  for (double alpha : {0.5, 1.0, 2.0}) {
    const Expr phi = Expr::power(1.0, alpha);
    const auto base = detect_hamza_set(line_spec(phi));
    for (double k : {1e-3, 7.0, 1e3}) {
      const auto scaled = detect_hamza_set(line_spec(Expr::product({Expr::constant(k), phi})));
      EXPECT_EQ(base.intervals, scaled.intervals);
      EXPECT_EQ(base.case_tag, scaled.case_tag);
      EXPECT_EQ(base.anchors, scaled.anchors);
    }
  }
}

TEST(DetectHamza, NonPositiveDensityIsSpecError) {
  EXPECT_THROW(detect_hamza_set(line_spec(Expr::polynomial({-1.0, 0.0, 1.0}))), SpecError);
}

TEST(DetectHamza, HalfLineNeverTreatsZeroAsCandidate) {
  ProblemSpec s = line_spec(Expr::power(0.0, 1.0));
  s.domain = DomainKind::half_line;
  s.options.window_lo = 0.0;
  const auto dec = detect_hamza_set(s);
  EXPECT_EQ(dec.case_tag, CaseTag::half_i);
  EXPECT_TRUE(dec.complement_points.empty());
}

TEST(ClassifyCase, ByIntervalStructure) {
  IntervalDecomposition whole;
  whole.intervals = {{-inf, inf}};
  EXPECT_EQ(classify_case(whole).case_tag, CaseTag::line_i);

  IntervalDecomposition split;
  split.intervals = {{0.0, inf}, {-inf, 0.0}};  // deliberately unordered
  split.complement_points = {0.0};
  const auto tagged = classify_case(split);
  EXPECT_EQ(tagged.case_tag, CaseTag::line_ii);
  EXPECT_EQ(tagged.anchors.a, 0.0);
  EXPECT_EQ(tagged.anchors.b, 0.0);
}

TEST(ClassifyCase, PermutationDoesNotChangeTag) {
  IntervalDecomposition dec;
  dec.intervals = {{-inf, -2.0}, {-2.0, 1.0}, {1.0, 4.0}, {4.0, inf}};
  dec.complement_points = {-2.0, 1.0, 4.0};
  const auto ref = classify_case(dec);
  std::vector<Interval> iv = dec.intervals;
  std::sort(iv.begin(), iv.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  do {
    IntervalDecomposition p = dec;
    p.intervals = iv;
    const auto got = classify_case(p);
    EXPECT_EQ(got.case_tag, ref.case_tag);
    EXPECT_EQ(got.anchors, ref.anchors);
  } while (std::next_permutation(iv.begin(), iv.end(), [](const Interval& x, const Interval& y) {
    return x.lo < y.lo;
  }));
}

TEST(ClassifyCase, HalfLineUnitIntervalsAreCaseTwo) {
  IntervalDecomposition dec;
  dec.domain = DomainKind::half_line;
  for (int n = 0; n < 10; ++n) dec.intervals.push_back({double(n), double(n + 1)});
  for (int n = 1; n <= 10; ++n) dec.complement_points.push_back(n);
  dec.right_tail = {TailKind::accumulating, PointPattern{0.0, 1.0, PatternExtent::right}};
  const auto tagged = classify_case(dec);
  EXPECT_EQ(tagged.case_tag, CaseTag::half_ii);
  for (int n = 1; n <= 5; ++n) EXPECT_DOUBLE_EQ(tagged.anchors.x_right(n), n);
}

TEST(ClassifyCase, EmptyUIsClassificationError) {
  IntervalDecomposition dec;
  EXPECT_THROW(classify_case(dec), ClassificationError);
}

TEST(Drift, BesselDrift) {
  for (double delta : {1.5, 3.0}) {
    ProblemSpec s = line_spec(Expr::power(0.0, delta - 1.0));
    s.domain = DomainKind::half_line;
    const DriftField f = drift_from_coefficients(s);
    for (double x : {0.5, 1.0, 4.0}) EXPECT_NEAR(f.drift(x), (delta - 1.0) / (2.0 * x), 1e-14);
    EXPECT_THROW(f.drift(0.0), EvaluationError);
  }
}

TEST(Drift, ConstantCoefficientsHaveNoDrift) {
  const DriftField f = drift_from_coefficients(line_spec(Expr::constant(1.0)));
  EXPECT_EQ(f.drift(0.3), 0.0);
  EXPECT_EQ(f.diffusion(0.3), 1.0);
}

TEST(Drift, ExponentialSigma) {
  const DriftField f = drift_from_coefficients(line_spec(Expr::constant(1.0), Expr::exponential(1.0)));
  for (double x : {-1.0, 0.0, 2.0}) EXPECT_NEAR(f.drift(x), std::exp(x) / 2.0, 1e-13 * std::exp(x));
}

TEST(Drift, AnalyticMatchesCentralDifferenceToSecondOrder) {
  const ProblemSpec s = line_spec(Expr::sum({Expr::constant(2.0), Expr::polynomial({0.0, 0.0, 1.0})}),
                                  Expr::exponential(0.3));
  const DriftField f = drift_from_coefficients(s);
  for (double x = -2.0; x <= 2.0; x += 0.25) {
    const double e1 = std::fabs(central_difference_drift(s, x, 1e-2) - f.drift(x));
    const double e2 = std::fabs(central_difference_drift(s, x, 5e-3) - f.drift(x));
    EXPECT_LT(e1, 1e-4);
    // Halving h cuts the error by about four.
    if (e1 > 1e-11) {
      EXPECT_LT(e2, 0.3 * e1) << x;
    }
  }
}
