#pragma once

#include "ltt/types.hpp"

#include <string>

namespace ltt {

enum class LearnerKind { Mean, PCA };

std::string to_string(LearnerKind k);
LearnerKind parse_learner(const std::string& s);

struct LearnedDirection {
  Vector v_hat;
  LearnerKind learner_kind = LearnerKind::Mean;
  int iterations_used = 0;
  bool converged = true;
};

struct PowerIterationOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

LearnedDirection mean_learner(const Matrix& X_learn);
// Mean learner from a precomputed column sum.
LearnedDirection mean_learner_from_sum(const Vector& column_sum);

LearnedDirection pca_learner(const Matrix& X_learn, PowerIterationOptions opts = {});
// Power iteration on a symmetric positive semidefinite Gram matrix. Stops once
// ||G v - lambda v|| <= tol * lambda; throws ConvergenceError otherwise.
LearnedDirection pca_from_gram(const Matrix& gram, PowerIterationOptions opts = {},
                               const Vector* warm_start = nullptr);

Matrix gram_matrix(const Matrix& X);

// Runs the requested learner. A ConvergenceError is absorbed into the result
// (last iterate, converged = false) when accept_unconverged is set.
LearnedDirection learn_direction(LearnerKind kind, const Matrix& X_learn,
                                 PowerIterationOptions opts = {}, bool accept_unconverged = false);

struct Alignment {
  double inner;
  double squared;
};
Alignment alignment(const Vector& v_hat, const Vector& v);

// Flip so the first nonzero coordinate is positive.
void fix_sign(Vector& v);

}  // namespace ltt
