#include "ltt/model.hpp"

#include "ltt/errors.hpp"

#include <cmath>

namespace ltt {

std::string to_string(Prior p) { return p == Prior::PointMass ? "point" : "subspace"; }

Prior parse_prior(const std::string& s) {
  if (s == "point" || s == "pointmass" || s == "point_mass") return Prior::PointMass;
  if (s == "subspace") return Prior::Subspace;
  throw DomainError("unknown prior '" + s + "' (expected point or subspace)");
}

void ModelParams::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
  if (!(h >= 0.0) || !std::isfinite(h)) throw DomainError("h must be finite and >= 0");
  if (m < 1) throw DomainError("m must be >= 1");
  if (d < 1) throw DomainError("d must be >= 1");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q must lie in (0, 1]");
  if (v.size() != static_cast<Eigen::Index>(d)) throw DomainError("direction v must have length d");
  if (std::fabs(v.norm() - 1.0) > 1e-12) throw DomainError("direction v must have unit norm");
}

ModelParams ModelParams::make(Prior prior, double gamma, double c, double h, std::size_t m,
                              double q) {
  if (!(c > 0.0)) throw DomainError("c must be positive");
  ModelParams p;
  p.prior = prior;
  p.gamma = gamma;
  p.h = h;
  p.m = m;
  p.q = q;
  const double dd = std::round(c * static_cast<double>(m));
  p.d = dd < 1.0 ? 1 : static_cast<std::size_t>(dd);
  p.v = Vector::Zero(static_cast<Eigen::Index>(p.d));
  p.v[0] = 1.0;
  p.validate();
  return p;
}

Vector random_unit_vector(std::size_t d, const RngStream& rng) {
  Vector v = sample_std_normal_vector(d, rng);
  return v / v.norm();
}

std::size_t Dataset::num_nonnull() const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < m(); ++j) n += nonnull(j) ? 1 : 0;
  return n;
}

Vector Dataset::theta_row(std::size_t j) const {
  return coef[static_cast<Eigen::Index>(j)] * params.v;
}

Matrix Dataset::theta() const { return coef * params.v.transpose(); }

Dataset generate_dataset(const ModelParams& params, const RngStream& rng) {
  params.validate();
  Engine eng = rng.engine();
  const auto m = static_cast<Eigen::Index>(params.m);
  const auto d = static_cast<Eigen::Index>(params.d);

  Dataset data;
  data.params = params;
  data.labels.assign(params.m, 0);
  data.coef = Vector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const bool alt = draw_uniform01(eng) < params.gamma;
    const double z = draw_std_normal(eng);
    data.labels[static_cast<std::size_t>(j)] = alt ? 1 : 0;
    if (alt) data.coef[j] = params.prior == Prior::PointMass ? params.h : params.h * z;
  }
  data.X.resize(m, d);
  fill_std_normal(data.X, eng);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (data.coef[j] != 0.0) data.X.row(j) += data.coef[j] * params.v.transpose();
  }
  return data;
}

Matrix draw_null_rows(std::size_t rows, std::size_t d, const RngStream& rng) {
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  Engine eng = rng.engine();
  fill_std_normal(out, eng);
  return out;
}

MaskedData fission_split(const Dataset& data, double pi_split, const RngStream& rng) {
  if (!(pi_split > 0.0 && pi_split < 1.0)) throw DomainError("fission_split: pi must lie in (0, 1)");
  const Matrix noise = draw_null_rows(data.m(), data.d(), rng);
  const double a = std::sqrt(pi_split), b = std::sqrt(1.0 - pi_split);
  MaskedData out;
  out.X_learn = a * data.X + b * noise;
  out.X_score = b * data.X - a * noise;
  return out;
}

Matrix fission_invert(const MaskedData& masked, double pi_split) {
  if (!(pi_split > 0.0 && pi_split < 1.0)) throw DomainError("fission_invert: pi must lie in (0, 1)");
  return std::sqrt(pi_split) * masked.X_learn + std::sqrt(1.0 - pi_split) * masked.X_score;
}

MaskedData augment_nulls(const Dataset& data, std::size_t m_tilde, const RngStream& rng) {
  if (m_tilde < 1) throw DomainError("augment_nulls: m_tilde must be >= 1");
  const auto m = static_cast<Eigen::Index>(data.m());
  const auto mt = static_cast<Eigen::Index>(m_tilde);
  MaskedData out;
  out.X_learn.resize(m + mt, static_cast<Eigen::Index>(data.d()));
  out.X_learn.topRows(m) = data.X;
  out.X_learn.bottomRows(mt) = draw_null_rows(m_tilde, data.d(), rng);
  out.X_score = data.X;
  out.learn_synthetic.assign(static_cast<std::size_t>(m + mt), 0);
  for (Eigen::Index k = m; k < m + mt; ++k) out.learn_synthetic[static_cast<std::size_t>(k)] = 1;
  return out;
}

Matrix generate_knockoff_copies(const Dataset& data, const RngStream& rng) {
  return draw_null_rows(data.m(), data.d(), rng);
}

double loglik_ratio(const Eigen::Ref<const Vector>& x, Prior prior, double h, const Vector& v_hat) {
  if (!(h > 0.0)) throw DomainError("loglik_ratio: h must be positive");
  const double proj = v_hat.dot(x);
  const double h2 = h * h;
  if (prior == Prior::PointMass) return h * proj - 0.5 * h2;
  return -0.5 * std::log1p(h2) + h2 * proj * proj / (2.0 * (1.0 + h2));
}

double transformed_score(const Eigen::Ref<const Vector>& x, Prior prior, const Vector& v_hat) {
  const double proj = v_hat.dot(x);
  return prior == Prior::PointMass ? proj : proj * proj;
}

Vector transformed_scores(const Matrix& X, Prior prior, const Vector& v_hat) {
  Vector proj = X * v_hat;
  if (prior == Prior::Subspace) proj = proj.array().square();
  return proj;
}

Vector loglik_ratios(const Matrix& X, Prior prior, double h, const Vector& v_hat) {
  if (!(h > 0.0)) throw DomainError("loglik_ratios: h must be positive");
  const Vector proj = X * v_hat;
  const double h2 = h * h;
  if (prior == Prior::PointMass) return (h * proj.array() - 0.5 * h2).matrix();
  return (-0.5 * std::log1p(h2) + h2 / (2.0 * (1.0 + h2)) * proj.array().square()).matrix();
}

}  // namespace ltt
