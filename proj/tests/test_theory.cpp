#include "ltt/errors.hpp"
#include "ltt/special_functions.hpp"
#include "ltt/theory.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ltt;

namespace {

constexpr double G = 0.2, C = 0.2, H = 4.0, Q = 0.1;

// Brute-force BH power: first grid point where the FDP curve drops to q.
double brute_tpr_gaussian(double mu, double gamma, double q, double step) {
  for (double t = -10.0; t <= 20.0; t += step) {
    const double a = std_normal_survival(t);
    if (a / ((1 - gamma) * a + gamma * std_normal_survival(t - mu)) <= q) return std_normal_survival(t - mu);
  }
  return 0.0;
}

}  // namespace

TEST(Masking, Transforms) {
  const MaskedParams id = masking_transform(G, C, H, MaskingKind::Split, 1.0);
  EXPECT_EQ(id.gamma, G);
  EXPECT_EQ(id.c, C);
  EXPECT_EQ(id.h, H);
  const MaskedParams aug = masking_transform(G, C, H, MaskingKind::Augment, 0.5);
  EXPECT_DOUBLE_EQ(aug.gamma, 0.1);
  EXPECT_DOUBLE_EQ(aug.c, 0.1);
  EXPECT_DOUBLE_EQ(aug.h, 4.0);
  EXPECT_DOUBLE_EQ(masking_transform(G, C, H, MaskingKind::Split, 0.25).h, 2.0);
  EXPECT_THROW(masking_transform(G, C, H, MaskingKind::Split, 0.0), DomainError);
}

TEST(Alignment, TauMean) {
  EXPECT_DOUBLE_EQ(tau_mean(0.3, 0.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(tau_mean(0.3, 0.5, 0.0), 0.0);
  EXPECT_NEAR(tau_mean(G, C, H), 0.872872, 5e-7);
  EXPECT_THROW(tau_mean(0.0, 0.0, 0.0), DomainError);
}

TEST(Alignment, TauPca) {
  // gamma^2 h^4 = c exactly: 0.25^2 * 16 = 1.
  EXPECT_DOUBLE_EQ(tau_pca_sq(0.25, 1.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(tau_pca_sq(0.3, 0.0, 2.0), 1.0);
  EXPECT_NEAR(tau_pca_sq(G, C, H), 0.922794, 5e-7);
  for (int i = 0; i <= 20; ++i) {
    const double t = tau_pca_sq(0.05 * i, C, H);
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(SignalStrength, Examples) {
  EXPECT_NEAR(signal_strength(Prior::PointMass, G, C, H, TheoryMethod::InSample), 3.2 / std::sqrt(0.84), 1e-12);
  EXPECT_NEAR(signal_strength(Prior::PointMass, G, C, H, TheoryMethod::InSample), 3.49149, 5e-6);
  EXPECT_NEAR(signal_strength(Prior::Subspace, G, C, H, TheoryMethod::Bonus, 0.5),
              16.0 * (1.0 - 0.2 / 5.12) / 1.0625, 1e-12);
  EXPECT_NEAR(signal_strength(Prior::Subspace, G, C, H, TheoryMethod::Bonus, 0.5), 14.4706, 5e-5);
  // Split point: sqrt(1 - pi) h tau_mean(gamma, c, sqrt(pi) h).
  const double pi = 0.5, hs = std::sqrt(pi) * H;
  EXPECT_NEAR(signal_strength(Prior::PointMass, G, C, H, TheoryMethod::Split, pi),
              std::sqrt(1 - pi) * H * hs * G / std::sqrt(hs * hs * G * G + C), 1e-12);
}

TEST(SignalStrength, InSampleDominatesBonus) {
  for (Prior prior : {Prior::PointMass, Prior::Subspace}) {
    const double in = signal_strength(prior, G, C, H, TheoryMethod::InSample);
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double b = signal_strength(prior, G, C, H, TheoryMethod::Bonus, 0.01 * i);
      EXPECT_LE(b, in + 1e-12);
      EXPECT_GE(b, prev);
      prev = b;
    }
    EXPECT_NEAR(prev, in, 1e-12);
  }
}

TEST(BhPower, GaussianExamples) {
  EXPECT_EQ(tpr_bh_gaussian(0.0, G, Q), 0.0);
  const double mu = 3.49149;
  EXPECT_NEAR(tpr_bh_gaussian(mu, G, Q), 0.925, 0.005);
  EXPECT_NEAR(tpr_bh_gaussian(mu, G, Q), brute_tpr_gaussian(mu, G, Q, 1e-4), 2e-4);
  // Scipy reference for the exact in-sample mean shift.
  EXPECT_NEAR(tpr_bh_gaussian(3.2 / std::sqrt(0.84), G, Q), 0.9250673, 1e-6);
  // Root satisfies the FDP equation.
  const BhPower bp = bh_power_gaussian(mu, G, Q);
  const double a = std_normal_survival(bp.threshold);
  EXPECT_NEAR(a / ((1 - G) * a + G * std_normal_survival(bp.threshold - mu)), Q, 1e-10);
}

TEST(BhPower, FdpCurveDecreasing) {
  const double mu = 3.0;
  auto fdp = [&](double t) {
    const double a = std_normal_survival(t);
    return a / ((1 - G) * a + G * std_normal_survival(t - mu));
  };
  EXPECT_NEAR(fdp(-30.0), 1.0, 1e-12);
  double prev = fdp(-5.0);
  for (int i = 1; i <= 1750; ++i) {
    const double f = fdp(-5.0 + 0.02 * i);
    EXPECT_LT(f, prev);
    prev = f;
  }
  EXPECT_LT(fdp(35.0), 1e-10);
}

TEST(BhPower, TranslationInvariance) {
  for (double mu : {1.0, 2.5, 3.49149}) {
    const double base = tpr_bh_gaussian(mu, G, Q);
    for (double a : {-3.0, 1.0, 7.0}) {
      const BhPower shifted = bh_power([a](double t) { return std_normal_survival(t - a); },
                                       [a, mu](double t) { return std_normal_survival(t - a - mu); }, G, Q,
                                       Interval(-10.0 + a, 20.0 + a), 1e-13);
      EXPECT_NEAR(shifted.tpr, base, 1e-10) << "a = " << a;
    }
  }
}

TEST(BhPower, ChisqExamplesAndScaleInvariance) {
  EXPECT_EQ(tpr_bh_chisq(0.0, G, Q), 0.0);
  const double mu2 = 14.4706;
  const double tpr = tpr_bh_chisq(mu2, G, Q);
  EXPECT_GT(tpr, 0.0);
  EXPECT_LT(tpr, 1.0);
  EXPECT_NEAR(tpr_bh_chisq(16.0 * (1.0 - 0.2 / 5.12) / 1.0625, G, Q), 0.519499, 2e-6);
  for (double K : {0.1, 3.0, 50.0}) {
    const double s = 1.0 + mu2;
    const BhPower scaled = bh_power([K](double t) { return chi2_1_survival(t / K); },
                                    [K, s](double t) { return chi2_1_survival(t / (K * s)); }, G, Q,
                                    Interval(K * 1e-12, K * 20.0), 1e-12 * K);
    EXPECT_NEAR(scaled.tpr, tpr, 1e-9) << "K = " << K;
  }
}

TEST(OptimalSplit, Examples) {
  EXPECT_NEAR(optimal_pi_split_point(G, C, H), 0.327933, 2e-6);
  EXPECT_LT(optimal_pi_split_point(G, 1e-12, H), 1e-5);
  EXPECT_NEAR(optimal_pi_split_point(G, C, 1e-7), 0.5, 1e-6);
  EXPECT_THROW(optimal_pi_split_point(G, C, 0.0), DomainError);
  // Grid argmax of the split mean shift.
  double best = -1.0, arg = 0.0;
  for (int i = 1; i < 10000; ++i) {
    const double pi = 1e-4 * i;
    const double mu = signal_strength(Prior::PointMass, G, C, H, TheoryMethod::Split, pi);
    if (mu > best) {
      best = mu;
      arg = pi;
    }
  }
  EXPECT_NEAR(arg, optimal_pi_split_point(G, C, H), 1e-4);
}

TEST(OptimalSplit, SplitPowerUniquelyPeaked) {
  const double opt = optimal_pi_split_point(G, C, H);
  double prev = 0.0;
  bool descending = false;
  for (int i = 1; i < 200; ++i) {
    const double pi = 0.005 * i;
    const double t = theory_point(Prior::PointMass, G, C, H, Q, TheoryMethod::Split, pi).tpr;
    if (!descending && t < prev) {
      descending = true;
      EXPECT_NEAR(pi - 0.005, opt, 0.0051);
    }
    if (descending) EXPECT_LE(t, prev + 1e-12);
    prev = t;
  }
  EXPECT_TRUE(descending);
}

TEST(TheoryPoint, ReferenceValues) {
  struct Row {
    Prior prior;
    TheoryMethod m;
    double pi, mu, tpr;
  };
  const Row rows[] = {
      {Prior::PointMass, TheoryMethod::Split, 0.2, 2.23498, 0.465312},
      {Prior::PointMass, TheoryMethod::Split, 0.5, 2.21880, 0.455820},
      {Prior::PointMass, TheoryMethod::Split, 0.8, 1.51695, 0.080017},
      {Prior::PointMass, TheoryMethod::Bonus, 0.2, 2.49878, 0.610496},
      {Prior::PointMass, TheoryMethod::Bonus, 0.5, 3.13786, 0.853945},
      {Prior::PointMass, TheoryMethod::Bonus, 0.8, 3.39199, 0.908762},
      {Prior::Subspace, TheoryMethod::Split, 0.2, 4.99048, 0.257708},
      {Prior::Subspace, TheoryMethod::Split, 0.5, 6.55556, 0.327557},
      {Prior::Subspace, TheoryMethod::Split, 0.8, 2.87754, 0.129160},
      {Prior::Subspace, TheoryMethod::Bonus, 0.2, 13.5882, 0.505534},
      {Prior::Subspace, TheoryMethod::Bonus, 0.5, 14.4706, 0.519499},
      {Prior::Subspace, TheoryMethod::Bonus, 0.8, 14.6912, 0.522816},
      {Prior::Subspace, TheoryMethod::InSample, 1.0, 14.7647, 0.523907},
  };
  for (const Row& r : rows) {
    const TheoryPoint p = theory_point(r.prior, G, C, H, Q, r.m, r.pi);
    EXPECT_NEAR(p.mu / r.mu, 1.0, 5e-6) << to_string(r.m) << " " << r.pi;
    EXPECT_NEAR(p.tpr, r.tpr, 2e-6) << to_string(r.m) << " " << r.pi;
    EXPECT_GE(p.tau, 0.0);
    EXPECT_LE(p.tau, 1.0);
  }
}

TEST(Proxy, LimitsAtLargeM) {
  const double in_point = tpr_bh_gaussian(signal_strength(Prior::PointMass, G, C, H, TheoryMethod::InSample), G, Q);
  EXPECT_NEAR(proxy_tpr_point(1e4, 1e8, G, C, H, Q), in_point, 1e-3);
  const double in_sub = tpr_bh_chisq(signal_strength(Prior::Subspace, G, C, H, TheoryMethod::InSample), G, Q);
  EXPECT_NEAR(proxy_tpr_subspace(1e4, 1e8, G, C, H, Q).tpr, in_sub, 1e-3);
  EXPECT_LT(proxy_tpr_point(1, 1e6, G, C, H, Q), proxy_tpr_point(100, 1e6, G, C, H, Q));
}

TEST(Proxy, SubcriticalSubspace) {
  const ProxyResult r = proxy_tpr_subspace(100, 1000, 0.2, 0.2, 1.0, Q);
  EXPECT_EQ(r.tpr, 0.0);
  EXPECT_TRUE(r.subcritical);
  EXPECT_THROW(expansion_coeffs_subspace(0.2, 0.2, 1.0, Q), DomainError);
}

TEST(Proxy, ZeroPseudocountMatchesAsymptoticBonus) {
  for (double pi : {0.2, 0.35, 0.5, 0.65, 0.8}) {
    const double r = (1.0 - pi) / pi;
    const double want = tpr_bh_gaussian(signal_strength(Prior::PointMass, G, C, H, TheoryMethod::Bonus, pi), G, Q);
    EXPECT_NEAR(proxy_point_delta_r(0.0, r, G, C, H, Q).tpr, want, 1e-9) << pi;
    const double want_s = tpr_bh_chisq(signal_strength(Prior::Subspace, G, C, H, TheoryMethod::Bonus, pi), G, Q);
    EXPECT_NEAR(proxy_subspace_delta_r(0.0, r, G, C, H, Q).tpr, want_s, 1e-9) << pi;
  }
}

TEST(Proxy, DegradesBeyondPseudocountRegion) {
  // Past the optimum (about 7.3e3 point, 3.7e4 subspace at m = 1e6) power only falls.
  double prev = 1.0;
  for (double mt = 2e4; mt <= 1e7; mt *= 1.5) {
    const double v = proxy_tpr_point(mt, 1e6, G, C, H, Q);
    EXPECT_LE(v, prev + 1e-12) << mt;
    prev = v;
  }
  prev = 1.0;
  for (double mt = 8e4; mt <= 1e7; mt *= 1.5) {
    const double v = proxy_tpr_subspace(mt, 1e6, G, C, H, Q).tpr;
    EXPECT_LE(v, prev + 1e-12) << mt;
    prev = v;
  }
}

TEST(Expansion, PointCoefficients) {
  const ExpansionCoeffs e = expansion_coeffs_point(G, C, H, Q);
  EXPECT_GT(e.eta1, 0.0);
  EXPECT_GT(e.eta2, 0.0);
  EXPECT_NEAR(e.dr_signal, -3.2 * 0.2 / (2.0 * std::pow(0.84, 1.5)), 1e-12);
  EXPECT_NEAR(e.dr_signal, -0.4157, 1e-3);
  EXPECT_NEAR(e.t0, 2.051479, 2e-6);
  EXPECT_NEAR(e.eta1, 3.306346, 1e-5);
  EXPECT_NEAR(e.eta2, 0.0627656, 1e-6);
  EXPECT_TRUE(e.self_check_ok);
}

TEST(Expansion, SubspaceCoefficients) {
  const ExpansionCoeffs e = expansion_coeffs_subspace(G, C, H, Q);
  EXPECT_GT(e.eta1, 0.0);
  EXPECT_GT(e.eta2, 0.0);
  EXPECT_LT(e.dr_signal, 0.0);
  EXPECT_NEAR(e.dr_signal, -0.294118, 1e-6);
  EXPECT_NEAR(e.t0, 6.403543, 2e-6);
  EXPECT_NEAR(e.eta1, 6.098561, 1e-5);
  EXPECT_NEAR(e.eta2, 0.00434944, 1e-7);
  EXPECT_TRUE(e.self_check_ok);
}

namespace {

// Central differences of the proxy in (1/(1+m_tilde), m_tilde/m) around m_tilde = 1e4, m = 1e8.
template <class P>
std::pair<double, double> fd_etas(P proxy) {
  const double mt0 = 1e4, m0 = 1e8;
  const double d0 = 1.0 / (1.0 + mt0), r0 = mt0 / m0, eps = 0.5 * d0;
  auto at = [&](double delta, double r) {
    const double mt = 1.0 / delta - 1.0;
    return proxy(mt, mt / r);
  };
  const double eta1 = -(at(d0 + eps, r0) - at(d0 - eps, r0)) / (2 * eps);
  const double eta2 = -(at(d0, r0 + 0.5 * r0) - at(d0, r0 - 0.5 * r0)) / r0;
  return {eta1, eta2};
}

}  // namespace

TEST(Expansion, FiniteDifferenceAgreement) {
  const ExpansionCoeffs ep = expansion_coeffs_point(G, C, H, Q);
  const auto [p1, p2] = fd_etas([](double mt, double m) { return proxy_tpr_point(mt, m, G, C, H, Q); });
  EXPECT_NEAR(p1 / ep.eta1, 1.0, 0.05);
  EXPECT_NEAR(p2 / ep.eta2, 1.0, 0.05);
  const ExpansionCoeffs es = expansion_coeffs_subspace(G, C, H, Q);
  const auto [s1, s2] = fd_etas([](double mt, double m) { return proxy_tpr_subspace(mt, m, G, C, H, Q).tpr; });
  EXPECT_NEAR(s1 / es.eta1, 1.0, 0.05);
  EXPECT_NEAR(s2 / es.eta2, 1.0, 0.05);
}

TEST(Expansion, ResidualBound) {
  const ExpansionCoeffs e = expansion_coeffs_point(G, C, H, Q);
  const double in = tpr_bh_gaussian(e.mu0, G, Q);
  const double m = 1e6;
  for (double mt : {300.0, 1000.0, 3000.0}) {
    const double lin = e.eta1 / mt + e.eta2 * mt / m;
    EXPECT_LE(std::fabs(proxy_tpr_point(mt, m, G, C, H, Q) - (in - lin)), 0.1 * lin) << mt;
  }
}

TEST(Expansion, ConjecturedOptimum) {
  ExpansionCoeffs e{};
  e.eta1 = 2.0;
  e.eta2 = 2.0;
  EXPECT_DOUBLE_EQ(mtilde_opt_conjectured(900.0, e), 30.0);
  const ExpansionCoeffs p = expansion_coeffs_point(G, C, H, Q);
  EXPECT_NEAR(mtilde_opt_conjectured(4000.0, p) / mtilde_opt_conjectured(1000.0, p), 2.0, 1e-12);
  EXPECT_NEAR(mtilde_opt_conjectured(1000.0, p), 229.516, 1e-3);
  e.eta2 = 0.0;
  EXPECT_THROW(mtilde_opt_conjectured(10.0, e), DomainError);
}
