#include "ltt/experiments.hpp"

#include "ltt/errors.hpp"
#include "ltt/root_finding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace ltt {

std::string to_string(Method m) {
  switch (m) {
    case Method::SplitBH: return "split_bh";
    case Method::Bonus: return "bonus";
    case Method::InSampleBH: return "insample_bh";
    case Method::CrtBH: return "crt_bh";
    case Method::KnockoffVanilla: return "knockoff_vanilla";
    case Method::KnockoffMLR: return "knockoff_mlr";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "split" || s == "split_bh") return Method::SplitBH;
  if (s == "bonus") return Method::Bonus;
  if (s == "insample" || s == "insample_bh") return Method::InSampleBH;
  if (s == "crt" || s == "crt_bh") return Method::CrtBH;
  if (s == "knockoff-vanilla" || s == "knockoff_vanilla" || s == "vanilla") return Method::KnockoffVanilla;
  if (s == "knockoff-mlr" || s == "knockoff_mlr" || s == "mlr") return Method::KnockoffMLR;
  throw DomainError("unknown method '" + s + "'");
}

std::size_t default_B(Method method, Prior prior) {
  if (method == Method::CrtBH) return 500;
  return prior == Prior::PointMass ? 50000 : 10000;
}

std::size_t mtilde_from_pi_aug(std::size_t m, double pi_aug) {
  if (!(pi_aug > 0.0 && pi_aug < 1.0)) throw DomainError("pi_aug must lie in (0, 1)");
  const double mt = std::round(static_cast<double>(m) * (1.0 - pi_aug) / pi_aug);
  return mt < 1.0 ? 1 : static_cast<std::size_t>(mt);
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& work) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const std::size_t nt = std::min(threads, n);
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe out;
  out.n = x.size();
  if (x.empty()) return out;
  double s = 0.0;
  for (double v : x) s += v;
  out.mean = s / static_cast<double>(x.size());
  if (x.size() < 2) return out;
  double ss = 0.0;
  for (double v : x) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(x.size() - 1)) / std::sqrt(static_cast<double>(x.size()));
  return out;
}

RejectionResult run_method(const MethodSpec& spec, double tuning, const Dataset& data, double q,
                           const RngStream& rng) {
  const Prior prior = data.params.prior;
  switch (spec.method) {
    case Method::SplitBH: return split_bh(data, tuning, spec.learner, q, rng);
    case Method::Bonus: return bonus(data, mtilde_from_pi_aug(data.m(), tuning), spec.learner, q, rng);
    case Method::InSampleBH: {
      InSampleOptions opts;
      opts.mode = spec.insample_mode;
      return insample_bh(data, spec.learner, spec.B ? spec.B : default_B(spec.method, prior), q, rng, opts);
    }
    case Method::CrtBH:
      if (spec.learner != LearnerKind::Mean) {
        throw UnsupportedConfigurationError("crt_bh: only the mean learner is supported");
      }
      return crt_bh(data, spec.B ? spec.B : default_B(spec.method, prior), q, rng);
    case Method::KnockoffVanilla:
    case Method::KnockoffMLR: {
      const auto stat = spec.method == Method::KnockoffVanilla ? KnockoffStatistic::Vanilla : KnockoffStatistic::MLR;
      return knockoffs(data, stat, spec.learner, spec.gamma_oracle.value_or(data.params.gamma), q, rng);
    }
  }
  throw DomainError("run_method: unknown method");
}

namespace {

bool has_tuning(Method m) { return m == Method::SplitBH || m == Method::Bonus; }

std::optional<double> theory_for(const ModelParams& p, const MethodSpec& spec, double tuning) {
  if (!(p.h > 0.0 && p.gamma > 0.0 && p.q < 1.0)) return std::nullopt;
  const LearnerKind natural = p.prior == Prior::PointMass ? LearnerKind::Mean : LearnerKind::PCA;
  if (spec.learner != natural) return std::nullopt;
  const double c = p.c();
  switch (spec.method) {
    case Method::SplitBH: return theory_point(p.prior, p.gamma, c, p.h, p.q, TheoryMethod::Split, tuning).tpr;
    case Method::Bonus: {
      const double mt = static_cast<double>(mtilde_from_pi_aug(p.m, tuning));
      const double pi_eff = static_cast<double>(p.m) / (static_cast<double>(p.m) + mt);
      return theory_point(p.prior, p.gamma, c, p.h, p.q, TheoryMethod::Bonus, pi_eff).tpr;
    }
    case Method::InSampleBH:
      if (spec.insample_mode != InSampleMode::SwapRetrain) return std::nullopt;
      return theory_point(p.prior, p.gamma, c, p.h, p.q, TheoryMethod::InSample).tpr;
    default: return std::nullopt;
  }
}

ExperimentRecord replicate(const ModelParams& params, const MethodSpec& spec, double tuning, std::size_t reps,
                           std::uint64_t base_seed, std::uint64_t cell, std::size_t threads) {
  std::vector<double> tpp(reps, 0.0), fdp(reps, 0.0);
  std::vector<std::uint8_t> ok(reps, 0);
  parallel_for(reps, threads, [&](std::size_t r) {
    const RngStream stream(base_seed, {cell, r});
    try {
      const Dataset data = generate_dataset(params, stream.child(0));
      const RejectionResult res = run_method(spec, tuning, data, params.q, stream.child(1));
      tpp[r] = res.tpp;
      fdp[r] = res.fdp;
      ok[r] = 1;
    } catch (const std::exception&) {
      ok[r] = 0;
    }
  });
  std::vector<double> tk, fk;
  for (std::size_t r = 0; r < reps; ++r) {
    if (ok[r]) {
      tk.push_back(tpp[r]);
      fk.push_back(fdp[r]);
    }
  }
  ExperimentRecord rec;
  rec.prior = to_string(params.prior);
  rec.method = to_string(spec.method);
  rec.learner = to_string(spec.learner);
  if (has_tuning(spec.method)) {
    rec.tuning_name = spec.method == Method::SplitBH ? "pi_split" : "pi_aug";
    rec.tuning_value = tuning;
  } else if (spec.method == Method::InSampleBH || spec.method == Method::CrtBH) {
    rec.tuning_name = "B";
    rec.tuning_value = static_cast<double>(spec.B ? spec.B : default_B(spec.method, params.prior));
  } else {
    rec.tuning_name = "none";
  }
  rec.h = params.h;
  rec.reps = tk.size();
  rec.n_failed = reps - tk.size();
  const MeanSe t = mean_se(tk), f = mean_se(fk);
  rec.mean_tpp = t.mean;
  rec.se_tpp = t.se;
  rec.mean_fdp = f.mean;
  rec.se_fdp = f.se;
  rec.theory_tpr = theory_for(params, spec, tuning);
  rec.q = params.q;
  return rec;
}

}  // namespace

std::vector<ExperimentRecord> run_replications(const ExperimentConfig& config) {
  config.params.validate();
  if (config.reps < 2) throw DomainError("run_replications: reps must be >= 2");
  std::vector<ExperimentRecord> out;
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    const MethodSpec& spec = config.methods[k];
    std::vector<double> grid = spec.grid;
    if (!has_tuning(spec.method)) grid = {0.0};
    if (grid.empty()) throw DomainError("run_replications: tuned method needs a grid");
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (has_tuning(spec.method) && !(grid[g] > 0.0 && grid[g] < 1.0)) {
        throw DomainError("run_replications: tuning values must lie in (0, 1)");
      }
      const std::uint64_t cell = static_cast<std::uint64_t>(k) * 100000 + g;
      out.push_back(replicate(config.params, spec, grid[g], config.reps, config.base_seed, cell, config.threads));
    }
  }
  return out;
}

std::vector<AlignmentRecord> alignment_curve(const ModelParams& params, MaskingKind masking,
                                             const std::vector<double>& grid, std::size_t reps,
                                             LearnerKind learner, std::uint64_t base_seed, std::size_t threads) {
  params.validate();
  if (reps < 2) throw DomainError("alignment_curve: reps must be >= 2");
  std::vector<AlignmentRecord> out;
  const std::uint64_t offset = masking == MaskingKind::Split ? 0 : 100000;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double pi = grid[g];
    if (!(pi > 0.0 && pi <= 1.0)) throw DomainError("alignment_curve: grid must lie in (0, 1]");
    std::size_t m_tilde = 0;
    double pi_eff = pi;
    if (masking == MaskingKind::Augment && pi < 1.0) {
      m_tilde = mtilde_from_pi_aug(params.m, pi);
      pi_eff = static_cast<double>(params.m) / static_cast<double>(params.m + m_tilde);
    }
    std::vector<double> vals(reps, 0.0);
    std::vector<std::uint8_t> unconverged(reps, 0);
    parallel_for(reps, threads, [&](std::size_t r) {
      const RngStream stream(base_seed, {offset + g, r});
      const Dataset data = generate_dataset(params, stream.child(0));
      LearnedDirection dir;
      if (pi >= 1.0) {
        dir = learn_direction(learner, data.X, {}, true);
      } else if (masking == MaskingKind::Split) {
        dir = learn_direction(learner, fission_split(data, pi, stream.child(1)).X_learn, {}, true);
      } else {
        dir = learn_direction(learner, augment_nulls(data, m_tilde, stream.child(1)).X_learn, {}, true);
      }
      unconverged[r] = dir.converged ? 0 : 1;
      const Alignment a = alignment(dir.v_hat, params.v);
      vals[r] = learner == LearnerKind::Mean ? a.inner : a.squared;
    });
    AlignmentRecord rec;
    rec.prior = to_string(params.prior);
    rec.learner = to_string(learner);
    rec.masking = masking == MaskingKind::Split ? "split" : "augment";
    rec.pi = pi;
    rec.reps = reps;
    for (auto u : unconverged) rec.n_unconverged += u;
    const MeanSe ms = mean_se(vals);
    rec.mean_alignment = ms.mean;
    rec.se_alignment = ms.se;
    const MaskedParams mp = masking_transform(params.gamma, params.c(), params.h, masking, pi_eff);
    rec.theory_alignment = learner == LearnerKind::Mean ? tau_mean(mp.gamma, mp.c, mp.h)
                                                        : tau_pca_sq(mp.gamma, mp.c, mp.h);
    rec.q = params.q;
    out.push_back(rec);
  }
  return out;
}

std::optional<double> matched_pi_split(Prior prior, double gamma, double c, double h, double pi_aug) {
  const MaskedParams aug = masking_transform(gamma, c, h, MaskingKind::Augment, pi_aug);
  if (prior == Prior::PointMass) {
    // pi h^2 g^2 / (pi h^2 g^2 + c) = tau^2  =>  pi = c tau^2 / (h^2 g^2 (1 - tau^2)).
    const double tau = tau_mean(aug.gamma, aug.c, aug.h);
    const double t2 = tau * tau;
    if (!(t2 > 0.0 && t2 < 1.0)) return std::nullopt;
    const double pi = c * t2 / (h * h * gamma * gamma * (1.0 - t2));
    if (!(pi > 0.0 && pi < 1.0)) return std::nullopt;
    return pi;
  }
  const double target = tau_pca_sq(aug.gamma, aug.c, aug.h);
  if (!(target > 0.0)) return std::nullopt;
  auto f = [&](double pi) { return -tau_pca_sq(gamma, c, std::sqrt(pi) * h); };
  const double lo = 1e-12, hi = 1.0 - 1e-12;
  if (!(f(lo) >= -target && -target >= f(hi))) return std::nullopt;
  return bisect_decreasing(f, -target, Interval(lo, hi), 1e-13);
}

std::vector<ExperimentRecord> knockoff_comparison(const ModelParams& params, const std::vector<double>& h_grid,
                                                  std::size_t reps, std::uint64_t base_seed, std::size_t threads,
                                                  std::size_t B) {
  if (reps < 2) throw DomainError("knockoff_comparison: reps must be >= 2");
  const LearnerKind learner = params.prior == Prior::PointMass ? LearnerKind::Mean : LearnerKind::PCA;
  std::vector<ExperimentRecord> out;
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    ModelParams p = params;
    p.h = h_grid[k];
    p.validate();
    // m_tilde = m corresponds to pi_aug = 1/2.
    const double pi_aug = 0.5;
    const std::uint64_t base_cell = 1000 * static_cast<std::uint64_t>(k);

    const auto pi_split = matched_pi_split(p.prior, p.gamma, p.c(), p.h, pi_aug);
    MethodSpec split{Method::SplitBH, learner, {}, 0, InSampleMode::SwapRetrain, std::nullopt};
    if (pi_split) {
      out.push_back(replicate(p, split, *pi_split, reps, base_seed, base_cell + 0, threads));
    } else {
      ExperimentRecord skipped;
      skipped.prior = to_string(p.prior);
      skipped.method = "split_bh";
      skipped.learner = to_string(learner);
      skipped.tuning_name = "pi_split";
      skipped.h = p.h;
      skipped.n_failed = reps;
      skipped.q = p.q;
      skipped.notes.push_back("no_matching_pi_split");
      out.push_back(skipped);
    }
    MethodSpec bon{Method::Bonus, learner, {}, 0, InSampleMode::SwapRetrain, std::nullopt};
    out.push_back(replicate(p, bon, pi_aug, reps, base_seed, base_cell + 1, threads));
    MethodSpec ins{Method::InSampleBH, learner, {}, B, InSampleMode::SwapRetrain, std::nullopt};
    out.push_back(replicate(p, ins, 0.0, reps, base_seed, base_cell + 2, threads));
    MethodSpec van{Method::KnockoffVanilla, learner, {}, 0, InSampleMode::SwapRetrain, std::nullopt};
    out.push_back(replicate(p, van, 0.0, reps, base_seed, base_cell + 3, threads));
    MethodSpec mlr{Method::KnockoffMLR, learner, {}, 0, InSampleMode::SwapRetrain, p.gamma};
    out.push_back(replicate(p, mlr, 0.0, reps, base_seed, base_cell + 4, threads));
  }
  return out;
}

}  // namespace ltt
