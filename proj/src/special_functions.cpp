#include "ltt/special_functions.hpp"

#include "ltt/errors.hpp"

#include <cmath>

namespace ltt {

namespace {
constexpr double kInvSqrt2 = 0.707106781186547524400844362105;
}

double std_normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double std_normal_cdf(double t) { return 0.5 * std::erfc(-t * kInvSqrt2); }

double std_normal_survival(double t) { return 0.5 * std::erfc(t * kInvSqrt2); }

double chi2_1_survival(double t) {
  if (!(t >= 0.0)) throw DomainError("chi2_1_survival: argument must be >= 0");
  return std::erfc(std::sqrt(0.5 * t));
}

double chi2_1_cdf(double t) {
  if (!(t >= 0.0)) throw DomainError("chi2_1_cdf: argument must be >= 0");
  return std::erf(std::sqrt(0.5 * t));
}

double chi2_1_pdf(double t) {
  if (!(t > 0.0)) throw DomainError("chi2_1_pdf: argument must be > 0");
  return kInvSqrt2Pi * std::exp(-0.5 * t) / std::sqrt(t);
}

double mills_ratio(double t) {
  if (t < 8.0) return std_normal_survival(t) / std_normal_pdf(t);
  // Lentz evaluation of 1/(t + 1/(t + 2/(t + 3/(t + ...)))).
  constexpr double tiny = 1e-300;
  double f = t, c = t, d = 0.0;
  for (int k = 1; k < 200; ++k) {
    d = t + k * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = t + k / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace ltt
