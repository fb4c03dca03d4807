#include "ltt/procedures.hpp"

#include "ltt/errors.hpp"
#include "ltt/dataset_io.hpp"
#include "ltt/special_functions.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ltt {

bool Diagnostics::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

namespace {

void check_q(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q must lie in (0, 1]");
}

// Number of entries of an ascending vector that are >= t.
std::size_t count_ge(const std::vector<double>& sorted, double t) {
  return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
}

IndexSet at_or_above(const Vector& s, double t) {
  IndexSet out;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (s[j] >= t) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

// Learner call shared by the procedures: unconverged PCA falls back to the last
// iterate with a flag; a degenerate mean leaves v_hat empty.
bool learn_or_flag(LearnerKind kind, const Matrix& X, Diagnostics& aux) {
  try {
    LearnedDirection dir = learn_direction(kind, X, {}, true);
    aux.v_hat = dir.v_hat;
    aux.learner_converged = dir.converged;
    aux.learner_iterations = dir.iterations_used;
    if (!dir.converged) aux.flags.push_back("learner_not_converged");
    return true;
  } catch (const DegenerateLearnerError&) {
    aux.flags.push_back("degenerate_learner");
    return false;
  }
}

RejectionResult empty_result(const std::string& tag, const Dataset& data, Diagnostics aux) {
  RejectionResult r;
  r.method_tag = tag;
  r.scores = Vector::Zero(static_cast<Eigen::Index>(data.m()));
  r.aux = std::move(aux);
  attach_metrics(r, data);
  return r;
}

}  // namespace

Calibration calibrate_threshold(const Vector& scores, const FdpEstimate& est, double q) {
  const auto m = static_cast<std::size_t>(scores.size());
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
  });
  Calibration out;
  std::size_t i = 0;
  while (i < m) {
    const double t = scores[static_cast<Eigen::Index>(order[i])];
    std::size_t k = i;
    while (k < m && scores[static_cast<Eigen::Index>(order[k])] == t) ++k;
    if (est.v_hat(t) / static_cast<double>(k) <= q) out.threshold = t;
    i = k;
  }
  if (out.threshold < kInf) out.rejected = at_or_above(scores, out.threshold);
  return out;
}

FdpEstimate split_fdp_estimate(Prior prior, std::size_t m) {
  const double md = static_cast<double>(m);
  if (prior == Prior::PointMass) return {[md](double t) { return md * std_normal_survival(t); }};
  return {[md](double t) { return md * chi2_1_survival(std::max(t, 0.0)); }};
}

FdpEstimate bonus_fdp_estimate(std::vector<double> null_scores, std::size_t m) {
  std::sort(null_scores.begin(), null_scores.end());
  const double scale = static_cast<double>(m) / (1.0 + static_cast<double>(null_scores.size()));
  return {[pool = std::move(null_scores), scale](double t) {
    return scale * (1.0 + static_cast<double>(count_ge(pool, t)));
  }};
}

FdpEstimate resample_fdp_estimate(std::vector<double> resampled, std::size_t m) {
  if (resampled.empty()) throw DomainError("resample_fdp_estimate: no resampled scores");
  std::sort(resampled.begin(), resampled.end());
  const double scale = static_cast<double>(m) / static_cast<double>(resampled.size());
  return {[pool = std::move(resampled), scale](double t) {
    return scale * static_cast<double>(count_ge(pool, t));
  }};
}

std::vector<double> conformal_pvalues(const Vector& scores, const std::vector<double>& null_scores) {
  std::vector<double> pool = null_scores;
  std::sort(pool.begin(), pool.end());
  const double denom = 1.0 + static_cast<double>(pool.size());
  std::vector<double> p(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    p[static_cast<std::size_t>(j)] = (1.0 + static_cast<double>(count_ge(pool, scores[j]))) / denom;
  }
  return p;
}

IndexSet bh(const std::vector<double>& pvalues, double q) {
  const std::size_t m = pvalues.size();
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bh: p-values must lie in [0, 1]");
  }
  std::vector<double> sorted = pvalues;
  std::sort(sorted.begin(), sorted.end());
  std::size_t k = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    if (sorted[i - 1] <= q * static_cast<double>(i) / static_cast<double>(m)) k = i;
  }
  IndexSet out;
  if (k == 0) return out;
  const double cut = sorted[k - 1];
  for (std::size_t j = 0; j < m; ++j) {
    if (pvalues[j] <= cut) out.push_back(j);
  }
  return out;
}

void attach_metrics(RejectionResult& r, const Dataset& data) {
  std::size_t true_pos = 0, false_pos = 0;
  for (std::size_t j : r.rejected) {
    if (data.nonnull(j)) {
      ++true_pos;
    } else {
      ++false_pos;
    }
  }
  const std::size_t n1 = data.num_nonnull();
  r.tpp = static_cast<double>(true_pos) / static_cast<double>(std::max<std::size_t>(1, n1));
  r.fdp = static_cast<double>(false_pos) / static_cast<double>(std::max<std::size_t>(1, r.rejected.size()));
}

RejectionResult split_bh(const Dataset& data, double pi_split, LearnerKind learner, double q,
                         const RngStream& rng) {
  check_q(q);
  const MaskedData masked = fission_split(data, pi_split, rng);
  Diagnostics aux;
  if (!learn_or_flag(learner, masked.X_learn, aux)) return empty_result("split_bh", data, std::move(aux));
  RejectionResult r;
  r.method_tag = "split_bh";
  r.scores = transformed_scores(masked.X_score, data.params.prior, aux.v_hat);
  const Calibration cal = calibrate_threshold(r.scores, split_fdp_estimate(data.params.prior, data.m()), q);
  r.threshold = cal.threshold;
  r.rejected = cal.rejected;
  r.aux = std::move(aux);
  attach_metrics(r, data);
  return r;
}

RejectionResult bonus(const Dataset& data, std::size_t m_tilde, LearnerKind learner, double q,
                      const RngStream& rng) {
  check_q(q);
  const MaskedData masked = augment_nulls(data, m_tilde, rng);
  Diagnostics aux;
  if (!learn_or_flag(learner, masked.X_learn, aux)) return empty_result("bonus", data, std::move(aux));
  RejectionResult r;
  r.method_tag = "bonus";
  r.scores = transformed_scores(masked.X_score, data.params.prior, aux.v_hat);
  const Vector null_scores = transformed_scores(
      Matrix(masked.X_learn.bottomRows(static_cast<Eigen::Index>(m_tilde))), data.params.prior, aux.v_hat);
  aux.reference_scores.assign(null_scores.data(), null_scores.data() + null_scores.size());
  const Calibration cal = calibrate_threshold(r.scores, bonus_fdp_estimate(aux.reference_scores, data.m()), q);
  r.threshold = cal.threshold;
  r.rejected = cal.rejected;
  r.aux = std::move(aux);
  attach_metrics(r, data);
  return r;
}

double draw_swap_mean_score(double s_norm, std::size_t d, Engine& eng) {
  // Split x into its component along s (z) and the orthogonal remainder,
  // whose squared norm is chi-square with d - 1 degrees of freedom.
  const double z = draw_std_normal(eng);
  const double xx = z * z + draw_chi_squared(static_cast<double>(d - 1), eng);
  const double num = s_norm * z + xx;
  const double den2 = s_norm * s_norm + 2.0 * s_norm * z + xx;
  return den2 > 0.0 ? num / std::sqrt(den2) : 0.0;
}

namespace {

// Top eigenpair of diag(lambda) + w w^T in the eigenbasis of the downdated
// Gram matrix, via the secular equation sum w_i^2 / (mu - lambda_i) = 1.
// Returns the scores u^T x (signed) and (u^T x)^2 of the fresh row.
struct SecularScore {
  double proj;
  double proj_sq;
};

SecularScore secular_score(const Vector& evals, const Vector& w, const Eigen::RowVectorXd& first_row) {
  const double lmax = evals.maxCoeff();
  const double wn2 = w.squaredNorm();
  double lo = lmax, hi = lmax + wn2;
  auto f = [&](double mu) { return ((w.array().square()) / (mu - evals.array())).sum() - 1.0; };
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double mu = hi;
  const Vector a = (w.array() / (mu - evals.array())).matrix();
  const double norm_a = a.norm();
  const double inner = w.dot(a);
  double sign = 1.0;
  const double lead = first_row.dot(a);
  if (lead < 0.0) sign = -1.0;
  const double proj = sign * inner / norm_a;
  return {proj, proj * proj};
}

}  // namespace

RejectionResult insample_bh(const Dataset& data, LearnerKind learner, std::size_t B, double q,
                            const RngStream& rng, InSampleOptions opts) {
  check_q(q);
  if (B < 1000) throw DomainError("insample_bh: B must be >= 1000");
  const std::size_t m = data.m(), d = data.d();
  if (opts.swap_row >= m) throw DomainError("insample_bh: swap row out of range");
  const Prior prior = data.params.prior;
  const auto swap = static_cast<Eigen::Index>(opts.swap_row);

  Diagnostics aux;
  Vector col_sum;
  Matrix gram;
  if (learner == LearnerKind::Mean) {
    col_sum = data.X.colwise().sum().transpose();
    try {
      const LearnedDirection dir = mean_learner_from_sum(col_sum);
      aux.v_hat = dir.v_hat;
    } catch (const DegenerateLearnerError&) {
      aux.flags.push_back("degenerate_learner");
      return empty_result("insample_bh", data, std::move(aux));
    }
  } else {
    gram = gram_matrix(data.X);
    try {
      const LearnedDirection dir = pca_from_gram(gram);
      aux.v_hat = dir.v_hat;
      aux.learner_iterations = dir.iterations_used;
    } catch (const ConvergenceError& e) {
      aux.v_hat = e.last_iterate();
      aux.learner_converged = false;
      aux.learner_iterations = e.iterations();
      aux.flags.push_back("learner_not_converged");
    }
  }

  RejectionResult r;
  r.method_tag = "insample_bh";
  r.scores = transformed_scores(data.X, prior, aux.v_hat);

  Engine eng = rng.engine();
  std::vector<double> pool(B);
  if (opts.mode == InSampleMode::FixedLearner) {
    aux.flags.push_back("fixed_learner_resampling");
    for (std::size_t b = 0; b < B; ++b) {
      const double z = draw_std_normal(eng);
      pool[b] = prior == Prior::PointMass ? z : z * z;
    }
  } else if (learner == LearnerKind::Mean) {
    const double s_norm = (col_sum - data.X.row(swap).transpose()).norm();
    for (std::size_t b = 0; b < B; ++b) {
      const double t = draw_swap_mean_score(s_norm, d, eng);
      pool[b] = prior == Prior::PointMass ? t : t * t;
    }
  } else {
    const Eigen::RowVectorXd x0 = data.X.row(swap);
    Matrix down = gram - x0.transpose() * x0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(down), Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw std::runtime_error("insample_bh: eigendecomposition failed");
    const Vector evals = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::RowVectorXd first_row = eig.eigenvectors().row(0);
    Vector w(static_cast<Eigen::Index>(d));
    for (std::size_t b = 0; b < B; ++b) {
      // Coordinates of a fresh N(0, I_d) row in the eigenbasis are again N(0, I_d).
      fill_std_normal(w.data(), d, eng);
      const SecularScore s = secular_score(evals, w, first_row);
      pool[b] = prior == Prior::PointMass ? s.proj : s.proj_sq;
    }
  }
  aux.reference_scores = pool;
  const Calibration cal = calibrate_threshold(r.scores, resample_fdp_estimate(std::move(pool), m), q);
  r.threshold = cal.threshold;
  r.rejected = cal.rejected;
  r.aux = std::move(aux);
  attach_metrics(r, data);
  return r;
}

RejectionResult crt_bh(const Dataset& data, std::size_t B, double q, const RngStream& rng) {
  check_q(q);
  if (data.params.prior != Prior::PointMass) {
    throw UnsupportedConfigurationError("crt_bh: only the point-mass prior with the mean learner is supported");
  }
  if (B < 1) throw DomainError("crt_bh: B must be >= 1");
  const std::size_t m = data.m(), d = data.d();
  Diagnostics aux;
  const Vector col_sum = data.X.colwise().sum().transpose();
  try {
    aux.v_hat = mean_learner_from_sum(col_sum).v_hat;
  } catch (const DegenerateLearnerError&) {
    aux.flags.push_back("degenerate_learner");
    return empty_result("crt_bh", data, std::move(aux));
  }
  RejectionResult r;
  r.method_tag = "crt_bh";
  r.scores = transformed_scores(data.X, Prior::PointMass, aux.v_hat);
  Engine eng = rng.engine();
  aux.pvalues.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double s_norm = (col_sum - data.X.row(jj).transpose()).norm();
    std::size_t count = 0;
    for (std::size_t b = 0; b < B; ++b) {
      if (draw_swap_mean_score(s_norm, d, eng) >= r.scores[jj]) ++count;
    }
    aux.pvalues[j] = (1.0 + static_cast<double>(count)) / (static_cast<double>(B) + 1.0);
  }
  r.rejected = bh(aux.pvalues, q);
  // Rejections are decided per hypothesis on the p-value scale; report that cutoff.
  if (!r.rejected.empty()) {
    double cut = 0.0;
    for (std::size_t j : r.rejected) cut = std::max(cut, aux.pvalues[j]);
    r.threshold = cut;
  }
  aux.flags.push_back("threshold_on_pvalue_scale");
  r.aux = std::move(aux);
  attach_metrics(r, data);
  return r;
}

double mlr_transform(double t, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("mlr_transform: gamma must lie in (0, 1]");
  const double a = std::log1p(-gamma);  // -inf at gamma = 1
  const double b = std::log(gamma) + t;
  const double hi = std::max(a, b), lo = std::min(a, b);
  if (lo == -kInf) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

Vector knockoff_w(const Vector& T, const Vector& T_knock, KnockoffStatistic stat, double gamma) {
  if (T.size() != T_knock.size()) throw DomainError("knockoff_w: size mismatch");
  if (stat == KnockoffStatistic::Vanilla) return T - T_knock;
  Vector W(T.size());
  for (Eigen::Index j = 0; j < T.size(); ++j) W[j] = mlr_transform(T[j], gamma) - mlr_transform(T_knock[j], gamma);
  return W;
}

double knockoff_threshold(const Vector& W, double q) {
  std::vector<double> pos, neg;  // W >= t and |W| for W <= -t, both ascending
  for (Eigen::Index j = 0; j < W.size(); ++j) {
    if (W[j] > 0.0) pos.push_back(W[j]);
    if (W[j] < 0.0) neg.push_back(-W[j]);
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> cand = pos;
  cand.insert(cand.end(), neg.begin(), neg.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (double t : cand) {
    const double num = 1.0 + static_cast<double>(count_ge(neg, t));
    const double den = static_cast<double>(std::max<std::size_t>(1, count_ge(pos, t)));
    if (num / den <= q) return t;
  }
  return kInf;
}

RejectionResult knockoffs_with_copies(const Dataset& data, const Matrix& X_knock,
                                      const KnockoffOptions& opts, double q) {
  check_q(q);
  if (X_knock.rows() != data.X.rows() || X_knock.cols() != data.X.cols()) {
    throw DomainError("knockoffs: copies must match the data shape");
  }
  if (opts.statistic == KnockoffStatistic::MLR && !(opts.gamma_oracle > 0.0 && opts.gamma_oracle <= 1.0)) {
    throw DomainError("knockoffs: MLR needs gamma_oracle in (0, 1]");
  }
  const double h = opts.h_oracle.value_or(data.params.h);
  const std::string tag = opts.statistic == KnockoffStatistic::Vanilla ? "knockoff_vanilla" : "knockoff_mlr";
  Matrix stacked(2 * data.X.rows(), data.X.cols());
  stacked.topRows(data.X.rows()) = data.X;
  stacked.bottomRows(data.X.rows()) = X_knock;
  Diagnostics aux;
  if (!learn_or_flag(opts.learner, stacked, aux)) return empty_result(tag, data, std::move(aux));
  const Prior prior = data.params.prior;
  const Vector T = loglik_ratios(data.X, prior, h, aux.v_hat);
  const Vector Tk = loglik_ratios(X_knock, prior, h, aux.v_hat);
  RejectionResult r;
  r.method_tag = tag;
  r.scores = knockoff_w(T, Tk, opts.statistic, opts.gamma_oracle);
  aux.w = r.scores;
  r.threshold = knockoff_threshold(r.scores, q);
  if (r.threshold < kInf) r.rejected = at_or_above(r.scores, r.threshold);
  r.aux = std::move(aux);
  attach_metrics(r, data);
  return r;
}

RejectionResult knockoffs(const Dataset& data, KnockoffStatistic statistic, LearnerKind learner,
                          double gamma_oracle, double q, const RngStream& rng,
                          std::optional<double> h_oracle) {
  const Matrix copies = generate_knockoff_copies(data, rng);
  KnockoffOptions opts;
  opts.statistic = statistic;
  opts.learner = learner;
  opts.gamma_oracle = gamma_oracle;
  opts.h_oracle = h_oracle;
  return knockoffs_with_copies(data, copies, opts, q);
}

nlohmann::json to_json(const RejectionResult& r, const ModelParams& params) {
  nlohmann::json j;
  j["method"] = r.method_tag;
  j["threshold"] = r.threshold < kInf ? nlohmann::json(r.threshold) : nlohmann::json(nullptr);
  j["n_reject"] = r.rejected.size();
  j["tpp"] = r.tpp;
  j["fdp"] = r.fdp;
  nlohmann::json p = params_to_json(params);
  p.erase("v");
  j["params"] = p;
  if (!r.aux.flags.empty()) j["flags"] = r.aux.flags;
  return j;
}

}  // namespace ltt
