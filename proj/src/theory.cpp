#include "ltt/theory.hpp"

#include "ltt/errors.hpp"
#include "ltt/root_finding.hpp"
#include "ltt/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace ltt {

namespace {

void check_pi(double pi) {
  if (!(pi > 0.0 && pi <= 1.0)) throw DomainError("tuning proportion must lie in (0, 1]");
}

void check_level(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
}

constexpr int kGaussianScanPoints = 3001;
constexpr int kChisqScanPoints = 4001;
constexpr double kProxyLo = -10.0;
constexpr double kProxyChisqLo = 1e-12;

}  // namespace

std::string to_string(TheoryMethod m) {
  switch (m) {
    case TheoryMethod::Split: return "split";
    case TheoryMethod::Bonus: return "bonus";
    case TheoryMethod::InSample: return "insample";
  }
  return "?";
}

MaskedParams masking_transform(double gamma, double c, double h, MaskingKind kind, double pi) {
  check_pi(pi);
  if (kind == MaskingKind::Split) return {gamma, c, std::sqrt(pi) * h};
  return {pi * gamma, pi * c, h};
}

double tau_mean(double gamma, double c, double h) {
  const double den2 = h * h * gamma * gamma + c;
  if (!(den2 > 0.0)) throw DomainError("tau_mean: undefined when h * gamma = 0 and c = 0");
  return h * gamma / std::sqrt(den2);
}

double tau_pca_sq(double gamma, double c, double h) {
  if (gamma <= 0.0 || h <= 0.0) return 0.0;
  if (c == 0.0) return 1.0;
  const double g2h4 = gamma * gamma * h * h * h * h;
  const double num = std::max(0.0, 1.0 - c / g2h4);
  return num / (1.0 + c / (gamma * h * h));
}

double signal_strength(Prior prior, double gamma, double c, double h, TheoryMethod method, double pi) {
  if (method != TheoryMethod::InSample) check_pi(pi);
  if (prior == Prior::PointMass) {
    switch (method) {
      case TheoryMethod::Split: return std::sqrt(1.0 - pi) * h * tau_mean(gamma, c, std::sqrt(pi) * h);
      case TheoryMethod::Bonus: return h * tau_mean(pi * gamma, pi * c, h);
      case TheoryMethod::InSample: return h * tau_mean(gamma, c, h);
    }
  }
  switch (method) {
    case TheoryMethod::Split: return (1.0 - pi) * h * h * tau_pca_sq(gamma, c, std::sqrt(pi) * h);
    case TheoryMethod::Bonus: return h * h * tau_pca_sq(pi * gamma, pi * c, h);
    case TheoryMethod::InSample: return h * h * tau_pca_sq(gamma, c, h);
  }
  return 0.0;
}

BhPower bh_power(const SurvivalFn& g0_bar, const SurvivalFn& g1_bar, double gamma, double q,
                 Interval bracket, double tol) {
  check_level(q);
  if (!(gamma > 0.0)) return {kInf, 0.0};
  auto fdp = [&](double t) {
    const double a = g0_bar(t);
    const double den = (1.0 - gamma) * a + gamma * g1_bar(t);
    return den > 0.0 ? a / den : 1.0;
  };
  if (fdp(bracket.lo) <= q) return {bracket.lo, g1_bar(bracket.lo)};
  if (fdp(bracket.hi) > q) return {kInf, 0.0};
  const double t = bisect_decreasing(fdp, q, bracket, tol);
  return {t, g1_bar(t)};
}

BhPower bh_power_gaussian(double mu, double gamma, double q, BhSolveOptions opts) {
  if (!(mu >= 0.0)) throw DomainError("tpr_bh_gaussian: mu must be >= 0");
  return bh_power([](double t) { return std_normal_survival(t); },
                  [mu](double t) { return std_normal_survival(t - mu); }, gamma, q,
                  Interval(opts.lo, opts.cap), opts.tol);
}

BhPower bh_power_chisq(double mu_sq, double gamma, double q, BhSolveOptions opts) {
  if (!(mu_sq >= 0.0)) throw DomainError("tpr_bh_chisq: mu^2 must be >= 0");
  const double s = 1.0 + mu_sq;
  return bh_power([](double t) { return chi2_1_survival(t); },
                  [s](double t) { return chi2_1_survival(t / s); }, gamma, q,
                  Interval(opts.chisq_lo, opts.cap), opts.tol);
}

double tpr_bh_gaussian(double mu, double gamma, double q, BhSolveOptions opts) {
  return bh_power_gaussian(mu, gamma, q, opts).tpr;
}

double tpr_bh_chisq(double mu_sq, double gamma, double q, BhSolveOptions opts) {
  return bh_power_chisq(mu_sq, gamma, q, opts).tpr;
}

double optimal_pi_split_point(double gamma, double c, double h) {
  if (!(h > 0.0 && gamma > 0.0 && c > 0.0)) throw DomainError("optimal_pi_split_point: need h, gamma, c > 0");
  const double tau = tau_mean(gamma, c, h);
  const double s = std::sqrt(std::max(0.0, 1.0 - tau * tau));
  return s / (1.0 + s);
}

TheoryPoint theory_point(Prior prior, double gamma, double c, double h, double q, TheoryMethod method,
                         double pi) {
  TheoryPoint p{prior, method, gamma, c, h, q, method == TheoryMethod::InSample ? 1.0 : pi, 0.0, 0.0, 0.0};
  MaskedParams mp{gamma, c, h};
  if (method == TheoryMethod::Split) mp = masking_transform(gamma, c, h, MaskingKind::Split, pi);
  if (method == TheoryMethod::Bonus) mp = masking_transform(gamma, c, h, MaskingKind::Augment, pi);
  p.mu = signal_strength(prior, gamma, c, h, method, p.pi);
  if (prior == Prior::PointMass) {
    p.tau = tau_mean(mp.gamma, mp.c, mp.h);
    p.tpr = tpr_bh_gaussian(p.mu, gamma, q);
  } else {
    p.tau = tau_pca_sq(mp.gamma, mp.c, mp.h);
    p.tpr = tpr_bh_chisq(p.mu, gamma, q);
  }
  return p;
}

double proxy_mu_point(double r, double gamma, double c, double h) {
  return h * h * gamma / std::sqrt(h * h * gamma * gamma + c * (1.0 + r));
}

double proxy_sigma_sq_subspace(double r, double gamma, double c, double h) {
  const double h2 = h * h;
  const double num = std::max(0.0, 1.0 - c * (1.0 + r) / (gamma * gamma * h2 * h2));
  return h2 * num / (1.0 + c / (gamma * h2));
}

ProxyResult proxy_point_delta_r(double delta, double r, double gamma, double c, double h, double q,
                                double cap) {
  check_level(q);
  const double mu = proxy_mu_point(r, gamma, c, h);
  auto fdp = [&](double t) {
    const double n0 = std_normal_survival(t);
    const double den = (1.0 - gamma) * n0 + gamma * std_normal_survival(t - mu);
    return den > 0.0 ? (delta + (1.0 - delta) * n0) / den : kInf;
  };
  // Left-most crossing: with a pseudocount the curve turns back up in the tail.
  const auto t = first_crossing_below(fdp, q, Interval(kProxyLo, cap), kGaussianScanPoints, 1e-12);
  if (!t) return {kInf, 0.0, false};
  return {*t, std_normal_survival(*t - mu), false};
}

ProxyResult proxy_subspace_delta_r(double delta, double r, double gamma, double c, double h, double q,
                                   double cap) {
  check_level(q);
  const double sigma_sq = proxy_sigma_sq_subspace(r, gamma, c, h);
  if (!(sigma_sq > 0.0)) return {kInf, 0.0, true};
  const double s = 1.0 + sigma_sq;
  auto fdp = [&](double t) {
    const double n0 = chi2_1_survival(t);
    const double den = (1.0 - gamma) * n0 + gamma * chi2_1_survival(t / s);
    return den > 0.0 ? (delta + (1.0 - delta) * n0) / den : kInf;
  };
  const auto t = first_crossing_below(fdp, q, Interval(kProxyChisqLo, cap), kChisqScanPoints, 1e-12);
  if (!t) return {kInf, 0.0, false};
  return {*t, chi2_1_survival(*t / s), false};
}

double proxy_tpr_point(double m_tilde, double m, double gamma, double c, double h, double q, double cap) {
  if (!(m_tilde >= 1.0) || !(m >= 1.0)) throw DomainError("proxy_tpr_point: need m_tilde >= 1 and m >= 1");
  return proxy_point_delta_r(1.0 / (1.0 + m_tilde), m_tilde / m, gamma, c, h, q, cap).tpr;
}

ProxyResult proxy_tpr_subspace(double m_tilde, double m, double gamma, double c, double h, double q,
                               double cap) {
  if (!(m_tilde >= 1.0) || !(m >= 1.0)) throw DomainError("proxy_tpr_subspace: need m_tilde >= 1 and m >= 1");
  return proxy_subspace_delta_r(1.0 / (1.0 + m_tilde), m_tilde / m, gamma, c, h, q, cap);
}

namespace {

template <class Proxy>
void self_check(ExpansionCoeffs& e, Proxy proxy) {
  constexpr double eps = 1e-5;
  const double d_delta = (proxy(eps, 0.0) - proxy(-eps, 0.0)) / (2.0 * eps);
  const double d_r = (proxy(0.0, eps) - proxy(0.0, -eps)) / (2.0 * eps);
  e.self_check_eta1 = std::fabs(-d_delta - e.eta1) / std::fabs(e.eta1);
  e.self_check_eta2 = std::fabs(-d_r - e.eta2) / std::fabs(e.eta2);
  e.self_check_ok = e.self_check_eta1 <= 0.1 && e.self_check_eta2 <= 0.1;
  if (!e.self_check_ok) {
    std::clog << "warning: expansion coefficients disagree with finite differences (eta1 "
              << e.self_check_eta1 << ", eta2 " << e.self_check_eta2 << " relative)\n";
  }
}

}  // namespace

ExpansionCoeffs expansion_coeffs_point(double gamma, double c, double h, double q) {
  check_level(q);
  const double mu0 = proxy_mu_point(0.0, gamma, c, h);
  if (!(mu0 > 0.0)) throw DomainError("expansion_coeffs_point: baseline signal must be positive");
  const BhPower base = bh_power_gaussian(mu0, gamma, q);
  if (!std::isfinite(base.threshold)) throw DomainError("expansion_coeffs_point: no baseline threshold");
  const double t0 = base.threshold;
  const double phi0 = std_normal_pdf(t0);
  const double phi1 = std_normal_pdf(t0 - mu0);
  const double den = phi0 - q * (gamma * phi1 + (1.0 - gamma) * phi0);
  const double h2 = h * h;
  const double dr_mu = -h2 * gamma * c / (2.0 * std::pow(h2 * gamma * gamma + c, 1.5));

  ExpansionCoeffs e{};
  e.t0 = t0;
  e.mu0 = mu0;
  e.sigma0_sq = 0.0;
  e.dr_signal = dr_mu;
  e.kappa1 = std_normal_cdf(t0) / den;
  e.kappa2 = -q * gamma * phi1 * dr_mu / den;
  e.kappa3 = -dr_mu;
  e.eta1 = phi1 * e.kappa1;
  e.eta2 = phi1 * (e.kappa2 + e.kappa3);
  if (!(e.eta1 > 0.0 && e.eta2 > 0.0)) throw DomainError("expansion_coeffs_point: non-positive coefficients");
  self_check(e, [&](double dl, double r) { return proxy_point_delta_r(dl, r, gamma, c, h, q).tpr; });
  return e;
}

ExpansionCoeffs expansion_coeffs_subspace(double gamma, double c, double h, double q) {
  check_level(q);
  const double h2 = h * h;
  if (!(gamma * gamma * h2 * h2 > c)) throw DomainError("expansion_coeffs_subspace: signal below detection threshold");
  const double sigma0 = proxy_sigma_sq_subspace(0.0, gamma, c, h);
  const double s0 = 1.0 + sigma0;
  const BhPower base = bh_power_chisq(sigma0, gamma, q);
  if (!std::isfinite(base.threshold)) throw DomainError("expansion_coeffs_subspace: no baseline threshold");
  const double t0 = base.threshold;
  const double a0 = chi2_1_pdf(t0);
  const double b0 = chi2_1_pdf(t0 / s0) / s0;
  const double B0 = chi2_1_survival(t0 / s0);
  const double N0 = chi2_1_survival(t0);
  const double D0 = (1.0 - gamma) * N0 + gamma * B0;
  const double dr_sigma = -h2 / (1.0 + c / (gamma * h2)) * c / (gamma * gamma * h2 * h2);
  const double det = a0 * B0 - N0 * b0;
  const double dr_B = b0 * t0 * dr_sigma / s0;

  ExpansionCoeffs e{};
  e.t0 = t0;
  e.mu0 = 0.0;
  e.sigma0_sq = sigma0;
  e.dr_signal = dr_sigma;
  e.kappa1 = chi2_1_cdf(t0) * D0 / (gamma * det);
  e.kappa2 = -N0 * dr_B / det;
  e.kappa3 = -t0 * dr_sigma / s0;
  e.eta1 = b0 * e.kappa1;
  e.eta2 = b0 * (e.kappa2 + e.kappa3);
  if (!(e.eta1 > 0.0 && e.eta2 > 0.0)) throw DomainError("expansion_coeffs_subspace: non-positive coefficients");
  self_check(e, [&](double dl, double r) { return proxy_subspace_delta_r(dl, r, gamma, c, h, q).tpr; });
  return e;
}

double mtilde_opt_conjectured(double m, const ExpansionCoeffs& coeffs) {
  if (!(m > 0.0) || !(coeffs.eta1 > 0.0) || !(coeffs.eta2 > 0.0)) {
    throw DomainError("mtilde_opt_conjectured: need m > 0 and positive coefficients");
  }
  return std::sqrt(coeffs.eta1 / coeffs.eta2) * std::sqrt(m);
}

}  // namespace ltt
