#pragma once

namespace ltt {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

double std_normal_pdf(double t);
double std_normal_cdf(double t);
// 1 - Phi(t), evaluated through erfc so the upper tail keeps full relative precision.
double std_normal_survival(double t);

// Survival, cdf and density of a chi-square with one degree of freedom.
double chi2_1_survival(double t);
double chi2_1_cdf(double t);
double chi2_1_pdf(double t);

// Phi_bar(t) / phi(t). Continued fraction in the far right tail where the
// quotient of two underflowing numbers would lose precision.
double mills_ratio(double t);

}  // namespace ltt
