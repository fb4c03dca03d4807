#include "ltt/errors.hpp"
#include "ltt/rng.hpp"
#include "ltt/root_finding.hpp"
#include "ltt/special_functions.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ltt;

namespace {

// Values of 1 - Phi(t) at 40 significant digits (mpmath).
struct Ref {
  double t, sf;
};
const Ref kSurvival[] = {
    {-8.0, 0.9999999999999993779},        {-4.0, 0.99996832875816688008},
    {-1.0, 0.84134474606854294859},       {0.5, 0.30853753872598689636},
    {2.0, 0.0227501319481792072},         {4.0, 0.000031671241833119921254},
    {6.0, 9.865876450376981407e-10},      {8.0, 6.2209605742717841235e-16},
};

}  // namespace

TEST(NormalSurvival, KnownValues) {
  EXPECT_DOUBLE_EQ(std_normal_survival(0.0), 0.5);
  EXPECT_NEAR(std_normal_survival(2.0), 0.0227501, 5e-8);
  for (const Ref& r : kSurvival) {
    EXPECT_NEAR(std_normal_survival(r.t) / r.sf, 1.0, 1e-12) << "t = " << r.t;
  }
}

TEST(NormalSurvival, SymmetryAndMonotonicityOnGrid) {
  double prev = 2.0;
  for (int i = 0; i < 100; ++i) {
    const double t = -8.0 + 16.0 * i / 99.0;
    EXPECT_NEAR(std_normal_survival(t) + std_normal_survival(-t), 1.0, 1e-12);
    const double s = std_normal_survival(t);
    EXPECT_LT(s, prev);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    prev = s;
  }
}

TEST(NormalSurvival, SaturatesWithoutError) {
  EXPECT_EQ(std_normal_survival(-60.0), 1.0);
  EXPECT_GE(std_normal_survival(60.0), 0.0);
}

TEST(Chi2Survival, Values) {
  EXPECT_DOUBLE_EQ(chi2_1_survival(0.0), 1.0);
  EXPECT_NEAR(chi2_1_survival(3.841459), 0.05, 1e-4);
  EXPECT_NEAR(chi2_1_survival(3.841459), 0.0499999946531958, 1e-13);
  EXPECT_THROW(chi2_1_survival(-1e-3), DomainError);
}

TEST(Chi2Survival, ScaleFamilyAgainstSquaredNormals) {
  // P(s Z^2 >= t) estimated from draws vs chi2_1_survival(t / s).
  Engine eng = RngStream(11, {1}).engine();
  const double s = 2.5, t = 4.0;
  const int n = 200000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double z = draw_std_normal(eng);
    hits += s * z * z >= t ? 1 : 0;
  }
  const double p = chi2_1_survival(t / s);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Chi2Survival, AgreesWithTwiceNormalTail) {
  for (double t : {0.01, 0.5, 1.0, 4.0, 10.0, 30.0}) {
    EXPECT_NEAR(chi2_1_survival(t) / (2.0 * std_normal_survival(std::sqrt(t))), 1.0, 1e-13);
  }
}

TEST(MillsRatio, Values) {
  EXPECT_NEAR(mills_ratio(0.0), 1.2533141373155, 1e-12);
  EXPECT_LT(mills_ratio(5.0), mills_ratio(4.0));
  for (double t : {3.0, 8.0, 10.0, 20.0, 40.0}) EXPECT_LT(mills_ratio(t), 1.0 / t);
  // Continued-fraction branch against high-precision references.
  EXPECT_NEAR(mills_ratio(8.0) / 0.12313196325793229628, 1.0, 1e-13);
  EXPECT_NEAR(mills_ratio(10.0) / 0.099028596471731921395, 1.0, 1e-13);
  EXPECT_NEAR(mills_ratio(20.0) / 0.049875925981836783658, 1.0, 1e-13);
  EXPECT_NEAR(mills_ratio(40.0) / 0.024984404205720571147, 1.0, 1e-13);
}

TEST(MillsRatio, StrictlyDecreasingGrid) {
  double prev = mills_ratio(-6.0);
  for (int i = 1; i <= 1200; ++i) {
    const double t = -6.0 + 0.01 * i;
    const double r = mills_ratio(t);
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, prev) << "t = " << t;
    prev = r;
  }
}

TEST(SurvivalRatio, IncreasingAndDivergent) {
  for (auto [mu0, mu1] : {std::pair{0.0, 1.0}, std::pair{0.5, 3.5}, std::pair{-1.0, 0.2}}) {
    auto R = [&](double t) { return std_normal_survival(t - mu1) / std_normal_survival(t - mu0); };
    double prev = R(-6.0);
    for (int i = 1; i <= 1400; ++i) {
      const double t = -6.0 + 0.01 * i;
      EXPECT_GT(R(t), prev) << "t = " << t;
      prev = R(t);
    }
    EXPECT_GT(R(8.0), 10.0 * R(0.0));
  }
}

TEST(Bisect, Examples) {
  EXPECT_NEAR(bisect_decreasing([](double t) { return -t; }, -3.0, Interval(0.0, 10.0), 1e-12), 3.0, 1e-11);
  EXPECT_NEAR(bisect_decreasing([](double t) { return std_normal_survival(t); }, 0.0227501, Interval(0.0, 8.0), 1e-12),
              2.0, 1e-6);
  EXPECT_THROW(bisect_decreasing([](double) { return 1.0; }, 0.5, Interval(0.0, 1.0), 1e-12), NoRootError);
  EXPECT_THROW(bisect_decreasing([](double t) { return -t; }, 5.0, Interval(0.0, 1.0), 1e-12), NoRootError);
}

TEST(Bisect, MatchesAnalyticInverses) {
  for (double y : {0.9, 0.3, 0.01, 1e-4}) {
    const double t = bisect_decreasing([](double x) { return std::exp(-x); }, y, Interval(0.0, 20.0), 1e-12);
    EXPECT_NEAR(t, -std::log(y), 1e-8);
  }
  for (double y : {0.2, 0.5, 0.7}) {
    const double t = bisect_decreasing([](double x) { return 1.0 / (1.0 + x * x); }, y, Interval(0.0, 10.0), 1e-12);
    EXPECT_NEAR(t, std::sqrt(1.0 / y - 1.0), 1e-8);
  }
}

TEST(Bisect, Deterministic) {
  auto f = [](double t) { return std::cos(t); };
  EXPECT_EQ(bisect_decreasing(f, 0.1, Interval(0.0, 3.0), 1e-12), bisect_decreasing(f, 0.1, Interval(0.0, 3.0), 1e-12));
}

TEST(FirstCrossing, FindsLeftmostRootOfBumpyCurve) {
  // (t - 1)^2 (t - 4)^2 dips below 0.5 first near t = 1.
  auto f = [](double t) { return (t - 1) * (t - 1) * (t - 4) * (t - 4) + 0.1; };
  const auto t = first_crossing_below(f, 0.5, Interval(-2.0, 6.0), 801, 1e-12);
  ASSERT_TRUE(t.has_value());
  // Left of 1 the product (t-1)(t-4) is positive, so the root solves (t-1)(t-4) = sqrt(0.4).
  const double s = std::sqrt(0.4);
  const double exact = (5.0 - std::sqrt(25.0 - 4.0 * (4.0 - s))) / 2.0;
  EXPECT_NEAR(*t, exact, 1e-9);
  EXPECT_FALSE(first_crossing_below(f, 0.01, Interval(-2.0, 6.0), 801, 1e-12).has_value());
}

TEST(Interval, RejectsInverted) {
  EXPECT_THROW(Interval(1.0, 0.0), DomainError);
  EXPECT_NO_THROW(Interval(1.0, 1.0));
}

TEST(Rng, SamePathSameDraws) {
  const Vector a = sample_std_normal_vector(50, RngStream(7, {3, 1}));
  const Vector b = sample_std_normal_vector(50, RngStream(7, {3, 1}));
  EXPECT_EQ(a, b);
  const Vector c = sample_std_normal_vector(50, RngStream(7, {1, 3}));
  EXPECT_NE(a, c);
  EXPECT_NE(RngStream(7).child(1).seed(), RngStream(8).child(1).seed());
  EXPECT_EQ(RngStream(7).child(3).child(1).seed(), RngStream(7, {3, 1}).seed());
}

TEST(Rng, DistinctPathsUncorrelated) {
  const std::size_t n = 100000;
  const Vector a = sample_std_normal_vector(n, RngStream(5, {0}));
  const Vector b = sample_std_normal_vector(n, RngStream(5, {1}));
  const double corr = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
  EXPECT_LT(std::fabs(corr), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Rng, NormalVectorMoments) {
  const std::size_t n = 100000;
  const Vector x = sample_std_normal_vector(n, RngStream(99, {2}));
  EXPECT_LT(std::fabs(x.mean()), 4.0 / std::sqrt(static_cast<double>(n)));
  const std::size_t d = 10000;
  const Vector y = sample_std_normal_vector(d, RngStream(99, {3}));
  // ||y||^2 / d has sd sqrt(2 / d).
  EXPECT_LT(std::fabs(y.squaredNorm() / d - 1.0), 5.0 * std::sqrt(2.0 / d));
  EXPECT_THROW(sample_std_normal_vector(0, RngStream(1)), DomainError);
}

TEST(Rng, ChiSquaredMoments) {
  Engine eng = RngStream(3, {4}).engine();
  const int n = 50000;
  const double k = 199.0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += draw_chi_squared(k, eng);
  EXPECT_NEAR(s / n, k, 5.0 * std::sqrt(2.0 * k / n));
  EXPECT_EQ(draw_chi_squared(0.0, eng), 0.0);
}
