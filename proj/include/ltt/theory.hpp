#pragma once

#include "ltt/model.hpp"
#include "ltt/types.hpp"

#include <functional>
#include <string>

namespace ltt {

enum class MaskingKind { Split, Augment };

struct MaskedParams {
  double gamma;
  double c;
  double h;
};

MaskedParams masking_transform(double gamma, double c, double h, MaskingKind kind, double pi);

double tau_mean(double gamma, double c, double h);
double tau_pca_sq(double gamma, double c, double h);

enum class TheoryMethod { Split, Bonus, InSample };
std::string to_string(TheoryMethod m);

// Point prior: mean shift mu. Subspace prior: chi-square scale offset mu^2.
// pi is ignored for InSample.
double signal_strength(Prior prior, double gamma, double c, double h, TheoryMethod method, double pi = 1.0);

struct BhSolveOptions {
  double lo = -10.0;  // Gaussian bracket; chi-square solves use chisq_lo
  double chisq_lo = 1e-12;
  double cap = 20.0;  // C
  double tol = 1e-12;
};

struct BhPower {
  double threshold;  // t*, +inf when no t qualifies
  double tpr;
};

using SurvivalFn = std::function<double(double)>;

// Generic BH power functional: t* = inf{t in bracket : G0(t) / ((1-g) G0(t) + g G1(t)) <= q},
// TPR = G1(t*). The curve is assumed non-increasing on the bracket.
BhPower bh_power(const SurvivalFn& g0_bar, const SurvivalFn& g1_bar, double gamma, double q,
                 Interval bracket, double tol);

BhPower bh_power_gaussian(double mu, double gamma, double q, BhSolveOptions opts = {});
BhPower bh_power_chisq(double mu_sq, double gamma, double q, BhSolveOptions opts = {});
double tpr_bh_gaussian(double mu, double gamma, double q, BhSolveOptions opts = {});
double tpr_bh_chisq(double mu_sq, double gamma, double q, BhSolveOptions opts = {});

double optimal_pi_split_point(double gamma, double c, double h);

struct TheoryPoint {
  Prior prior;
  TheoryMethod method;
  double gamma, c, h, q;
  double pi;   // tuning (pi_split or pi_aug); 1 for InSample
  double tau;  // alignment (point) or squared alignment (subspace)
  double mu;   // mean shift (point) or mu^2 (subspace)
  double tpr;
};

TheoryPoint theory_point(Prior prior, double gamma, double c, double h, double q, TheoryMethod method,
                         double pi = 1.0);

// Proxy quantities for BONuS at finite m_tilde, parameterized by the
// pseudocount delta = 1/(1+m_tilde) and the aspect inflation r = m_tilde/m.
struct ProxyResult {
  double threshold;  // +inf when no root
  double tpr;
  bool subcritical = false;  // subspace only: sigma^2 clamped to 0
};

double proxy_mu_point(double r, double gamma, double c, double h);
double proxy_sigma_sq_subspace(double r, double gamma, double c, double h);

ProxyResult proxy_point_delta_r(double delta, double r, double gamma, double c, double h, double q,
                                double cap = 20.0);
ProxyResult proxy_subspace_delta_r(double delta, double r, double gamma, double c, double h, double q,
                                   double cap = 20.0);

double proxy_tpr_point(double m_tilde, double m, double gamma, double c, double h, double q, double cap = 20.0);
ProxyResult proxy_tpr_subspace(double m_tilde, double m, double gamma, double c, double h, double q,
                               double cap = 20.0);

struct ExpansionCoeffs {
  double eta1;
  double eta2;
  double t0;
  double mu0;        // point: baseline mean shift
  double sigma0_sq;  // subspace: baseline chi-square offset
  double kappa1, kappa2, kappa3;
  double dr_signal;  // d mu / dr (point) or d sigma^2 / dr (subspace) at r = 0
  // Built-in finite-difference cross-check of eta1, eta2 (relative mismatch).
  double self_check_eta1;
  double self_check_eta2;
  bool self_check_ok;
};

ExpansionCoeffs expansion_coeffs_point(double gamma, double c, double h, double q);
ExpansionCoeffs expansion_coeffs_subspace(double gamma, double c, double h, double q);

double mtilde_opt_conjectured(double m, const ExpansionCoeffs& coeffs);

}  // namespace ltt
