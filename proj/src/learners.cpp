#include "ltt/learners.hpp"

#include "ltt/errors.hpp"

#include <cmath>

namespace ltt {

std::string to_string(LearnerKind k) { return k == LearnerKind::Mean ? "mean" : "pca"; }

LearnerKind parse_learner(const std::string& s) {
  if (s == "mean") return LearnerKind::Mean;
  if (s == "pca" || s == "PCA") return LearnerKind::PCA;
  throw DomainError("unknown learner '" + s + "' (expected mean or pca)");
}

void fix_sign(Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

LearnedDirection mean_learner_from_sum(const Vector& column_sum) {
  const double n = column_sum.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DegenerateLearnerError("mean learner: column average is zero");
  }
  LearnedDirection out;
  out.v_hat = column_sum / n;
  out.learner_kind = LearnerKind::Mean;
  return out;
}

LearnedDirection mean_learner(const Matrix& X_learn) {
  if (X_learn.rows() < 1) throw DomainError("mean learner: no rows");
  return mean_learner_from_sum(X_learn.colwise().sum().transpose());
}

Matrix gram_matrix(const Matrix& X) {
  Matrix g = Matrix::Zero(X.cols(), X.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

LearnedDirection pca_from_gram(const Matrix& gram, PowerIterationOptions opts,
                               const Vector* warm_start) {
  const Eigen::Index d = gram.rows();
  if (d < 1 || gram.cols() != d) throw DomainError("pca: Gram matrix must be square and nonempty");
  if (!(opts.tol > 0.0) || opts.max_iter < 1) throw DomainError("pca: invalid tolerance or iteration cap");
  if (gram.diagonal().maxCoeff() <= 0.0) throw DomainError("pca: data matrix is zero");

  Vector v;
  if (warm_start != nullptr && warm_start->size() == d && warm_start->norm() > 0.0) {
    v = *warm_start / warm_start->norm();
  } else {
    v = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  }
  Vector w(d);
  for (int it = 1; it <= opts.max_iter; ++it) {
    w.noalias() = gram * v;
    const double lambda = v.dot(w);
    const double wn = w.norm();
    if (!(wn > 0.0)) {
      // Start vector in the null space; restart from a basis vector with mass.
      Eigen::Index k;
      gram.diagonal().maxCoeff(&k);
      v.setZero();
      v[k] = 1.0;
      continue;
    }
    const double resid = (w - lambda * v).norm();
    if (resid <= opts.tol * lambda) {
      LearnedDirection out;
      out.v_hat = v;
      fix_sign(out.v_hat);
      out.learner_kind = LearnerKind::PCA;
      out.iterations_used = it;
      return out;
    }
    v = w / wn;
  }
  fix_sign(v);
  throw ConvergenceError("pca: power iteration did not converge", v, opts.max_iter);
}

LearnedDirection pca_learner(const Matrix& X_learn, PowerIterationOptions opts) {
  if (X_learn.rows() < 1) throw DomainError("pca: no rows");
  return pca_from_gram(gram_matrix(X_learn), opts);
}

LearnedDirection learn_direction(LearnerKind kind, const Matrix& X_learn, PowerIterationOptions opts,
                                 bool accept_unconverged) {
  if (kind == LearnerKind::Mean) return mean_learner(X_learn);
  try {
    return pca_learner(X_learn, opts);
  } catch (const ConvergenceError& e) {
    if (!accept_unconverged) throw;
    LearnedDirection out;
    out.v_hat = e.last_iterate();
    out.learner_kind = LearnerKind::PCA;
    out.iterations_used = e.iterations();
    out.converged = false;
    return out;
  }
}

Alignment alignment(const Vector& v_hat, const Vector& v) {
  if (v_hat.size() != v.size()) throw DomainError("alignment: dimension mismatch");
  const double a = v_hat.dot(v);
  return {a, a * a};
}

}  // namespace ltt
