#pragma once

#include "ltt/learners.hpp"
#include "ltt/model.hpp"
#include "ltt/procedures.hpp"
#include "ltt/theory.hpp"
#include "ltt/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ltt {

enum class Method { SplitBH, Bonus, InSampleBH, CrtBH, KnockoffVanilla, KnockoffMLR };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct MethodSpec {
  Method method = Method::SplitBH;
  LearnerKind learner = LearnerKind::Mean;
  // pi_split for SplitBH, pi_aug for Bonus (m_tilde = round(m (1 - pi) / pi)).
  // Methods without a tuning parameter run once and ignore the grid.
  std::vector<double> grid;
  std::size_t B = 0;  // 0 selects 50000 (point) / 10000 (subspace) for in-sample, 500 for CRT
  InSampleMode insample_mode = InSampleMode::SwapRetrain;
  std::optional<double> gamma_oracle;  // knockoffs MLR; defaults to params.gamma
};

struct ExperimentConfig {
  ModelParams params = ModelParams::defaults(Prior::PointMass);
  std::vector<MethodSpec> methods;
  std::size_t reps = 1000;
  std::uint64_t base_seed = 1;
  std::size_t threads = 1;
  std::string output_path;
};

struct ExperimentRecord {
  std::string prior;
  std::string method;
  std::string learner;
  std::string tuning_name;  // pi_split, pi_aug, B or none
  double tuning_value = 0.0;
  double h = 0.0;
  std::size_t reps = 0;
  std::size_t n_failed = 0;
  double mean_tpp = 0.0, se_tpp = 0.0;
  double mean_fdp = 0.0, se_fdp = 0.0;
  std::optional<double> theory_tpr;
  double q = 0.1;
  std::vector<std::string> notes;
};

std::size_t default_B(Method method, Prior prior);
std::size_t mtilde_from_pi_aug(std::size_t m, double pi_aug);

RejectionResult run_method(const MethodSpec& spec, double tuning, const Dataset& data, double q,
                           const RngStream& rng);

std::vector<ExperimentRecord> run_replications(const ExperimentConfig& config);

// Runs work(i) for i in [0, n) on up to `threads` workers. Results must be
// written to pre-sized slots so the reduction order stays fixed.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& work);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};
MeanSe mean_se(const std::vector<double>& x);

struct AlignmentRecord {
  std::string prior;
  std::string learner;
  std::string masking;
  double pi = 1.0;
  std::size_t reps = 0;
  std::size_t n_unconverged = 0;
  double mean_alignment = 0.0;  // v_hat^T v (mean learner) or its square (PCA)
  double se_alignment = 0.0;
  double theory_alignment = 0.0;
  double q = 0.1;
};

std::vector<AlignmentRecord> alignment_curve(const ModelParams& params, MaskingKind masking,
                                             const std::vector<double>& grid, std::size_t reps,
                                             LearnerKind learner, std::uint64_t base_seed,
                                             std::size_t threads = 1);

// Split proportion whose learner quality matches augmentation at pi_aug
// (point: tau_mean, subspace: tau_pca_sq). nullopt when no match in (0, 1).
std::optional<double> matched_pi_split(Prior prior, double gamma, double c, double h, double pi_aug);

std::vector<ExperimentRecord> knockoff_comparison(const ModelParams& params, const std::vector<double>& h_grid,
                                                  std::size_t reps, std::uint64_t base_seed,
                                                  std::size_t threads = 1, std::size_t B = 0);

// ---- adaptive m_tilde search ----

struct MtildeEvaluation {
  std::size_t m_tilde = 0;
  double tpp = 0.0;
  double se = 0.0;
};

enum class SeMode { RunningMax, Current };

struct MtildeSearchOptions {
  std::size_t start = 10;
  std::size_t stride = 1;
  std::size_t patience = 5;
  SeMode se_mode = SeMode::RunningMax;
  std::optional<std::size_t> cap;  // defaults to floor(20 sqrt(m))
  std::size_t block = 32;          // evaluation points requested per evaluator call
};

struct MtildeSearchResult {
  std::size_t m = 0;
  std::size_t mtilde_hat = 0;
  double tpp_max = 0.0;
  double se_at_max = 0.0;
  Interval interval;
  std::vector<MtildeEvaluation> evaluations;
  bool forced_stop = false;
};

using MtildeEvaluator = std::function<std::vector<MtildeEvaluation>(const std::vector<std::size_t>&)>;

MtildeSearchResult adaptive_mtilde_search(std::size_t m, const MtildeEvaluator& evaluate,
                                          const MtildeSearchOptions& opts = {});

// Mean BONuS TPP over reps replications for each m_tilde in the list. The
// same datasets and nested null pools are used for every m_tilde.
std::vector<MtildeEvaluation> bonus_tpp_path(const ModelParams& params, LearnerKind learner,
                                             const std::vector<std::size_t>& m_tildes, std::size_t reps,
                                             std::uint64_t base_seed, std::uint64_t cell,
                                             std::size_t threads = 1);
// Per-replication TPP for each m_tilde (rows: replications).
std::vector<std::vector<double>> bonus_tpp_path_by_rep(const ModelParams& params, LearnerKind learner,
                                                       const std::vector<std::size_t>& m_tildes,
                                                       std::size_t reps, std::uint64_t base_seed,
                                                       std::uint64_t cell, std::size_t threads = 1);

MtildeSearchResult adaptive_mtilde_search(std::size_t m, const ModelParams& params, double q, std::size_t reps,
                                          const MtildeSearchOptions& opts, std::uint64_t base_seed,
                                          std::uint64_t cell = 0, std::size_t threads = 1,
                                          LearnerKind learner = LearnerKind::Mean);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double se_slope = 0.0;
  Interval ci;  // 95%
  std::size_t n = 0;
};

SlopeFit loglog_slope_fit(const std::vector<std::pair<double, double>>& points);

std::vector<std::size_t> log_spaced_counts(double lo, double hi, std::size_t n);

struct ScalingResult {
  std::vector<MtildeSearchResult> searches;
  SlopeFit fit;
  ExpansionCoeffs coeffs;
};

ScalingResult mtilde_scaling(const ModelParams& base, const std::vector<std::size_t>& m_values, std::size_t reps,
                             const MtildeSearchOptions& opts, std::uint64_t base_seed, std::size_t threads = 1);

}  // namespace ltt
