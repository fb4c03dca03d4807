#pragma once

#include "ltt/learners.hpp"
#include "ltt/model.hpp"
#include "ltt/rng.hpp"
#include "ltt/types.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ltt {

enum class KnockoffStatistic { Vanilla, MLR };
enum class InSampleMode { SwapRetrain, FixedLearner };

struct Diagnostics {
  std::vector<std::string> flags;
  std::vector<double> reference_scores;  // null pool or resampled null scores
  std::vector<double> pvalues;           // CRT p-values
  Vector w;                              // knockoff statistics
  Vector v_hat;
  bool learner_converged = true;
  int learner_iterations = 0;

  bool has_flag(const std::string& f) const;
};

struct RejectionResult {
  std::string method_tag;
  Vector scores;
  double threshold = kInf;
  IndexSet rejected;
  double tpp = 0.0;
  double fdp = 0.0;
  Diagnostics aux;
};

// t -> V_hat(t), non-increasing. Candidate thresholds are the observed scores.
struct FdpEstimate {
  std::function<double(double)> v_hat;
};

struct Calibration {
  double threshold = kInf;
  IndexSet rejected;
};

Calibration calibrate_threshold(const Vector& scores, const FdpEstimate& est, double q);

FdpEstimate split_fdp_estimate(Prior prior, std::size_t m);
// m/(1+m_tilde) * (1 + #{null >= t}).
FdpEstimate bonus_fdp_estimate(std::vector<double> null_scores, std::size_t m);
// m * #{resampled >= t} / B.
FdpEstimate resample_fdp_estimate(std::vector<double> resampled, std::size_t m);

// (1 + #{null >= S_j}) / (1 + m_tilde).
std::vector<double> conformal_pvalues(const Vector& scores, const std::vector<double>& null_scores);

IndexSet bh(const std::vector<double>& pvalues, double q);

// Fills tpp and fdp from the true null/non-null split of the data.
void attach_metrics(RejectionResult& r, const Dataset& data);

RejectionResult split_bh(const Dataset& data, double pi_split, LearnerKind learner, double q,
                         const RngStream& rng);

RejectionResult bonus(const Dataset& data, std::size_t m_tilde, LearnerKind learner, double q,
                      const RngStream& rng);

struct InSampleOptions {
  InSampleMode mode = InSampleMode::SwapRetrain;
  std::size_t swap_row = 0;
};

RejectionResult insample_bh(const Dataset& data, LearnerKind learner, std::size_t B, double q,
                            const RngStream& rng, InSampleOptions opts = {});

RejectionResult crt_bh(const Dataset& data, std::size_t B, double q, const RngStream& rng);

// Null score u^T x for x ~ N(0, I_d), u = (s + x)/||s + x||, given ||s||.
double draw_swap_mean_score(double s_norm, std::size_t d, Engine& eng);

// log(1 - gamma + gamma e^t), stable through log-add-exp; gamma in (0, 1].
double mlr_transform(double t, double gamma);
Vector knockoff_w(const Vector& T, const Vector& T_knock, KnockoffStatistic stat, double gamma);
// Smallest t among distinct positive |W| with (1 + #{W <= -t}) / max(1, #{W >= t}) <= q.
double knockoff_threshold(const Vector& W, double q);

struct KnockoffOptions {
  KnockoffStatistic statistic = KnockoffStatistic::Vanilla;
  LearnerKind learner = LearnerKind::Mean;
  double gamma_oracle = 0.2;
  std::optional<double> h_oracle;  // defaults to the data's h
};

RejectionResult knockoffs(const Dataset& data, KnockoffStatistic statistic, LearnerKind learner,
                          double gamma_oracle, double q, const RngStream& rng,
                          std::optional<double> h_oracle = std::nullopt);
RejectionResult knockoffs_with_copies(const Dataset& data, const Matrix& X_knock,
                                      const KnockoffOptions& opts, double q);

nlohmann::json to_json(const RejectionResult& r, const ModelParams& params);

}  // namespace ltt
