#include "ltt/errors.hpp"
#include "ltt/experiments.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace ltt {

MtildeSearchResult adaptive_mtilde_search(std::size_t m, const MtildeEvaluator& evaluate,
                                          const MtildeSearchOptions& opts) {
  if (opts.stride < 1 || opts.patience < 1 || opts.start < 1 || opts.block < 1) {
    throw DomainError("adaptive_mtilde_search: start, stride, patience and block must be >= 1");
  }
  const std::size_t cap =
      opts.cap.value_or(static_cast<std::size_t>(std::floor(20.0 * std::sqrt(static_cast<double>(m)))));
  MtildeSearchResult res;
  res.m = m;
  std::size_t best = 0, fails = 0;
  bool done = false;
  std::size_t next = opts.start;
  while (!done) {
    std::vector<std::size_t> block;
    for (std::size_t mt = next; mt <= cap && block.size() < opts.block; mt += opts.stride) block.push_back(mt);
    if (block.empty()) {
      res.forced_stop = true;
      break;
    }
    next = block.back() + opts.stride;
    const std::vector<MtildeEvaluation> evals = evaluate(block);
    if (evals.size() != block.size()) throw std::runtime_error("adaptive_mtilde_search: evaluator returned wrong count");
    for (const MtildeEvaluation& e : evals) {
      res.evaluations.push_back(e);
      const std::size_t i = res.evaluations.size() - 1;
      if (i == 0) {
        best = 0;
        continue;
      }
      const MtildeEvaluation& top = res.evaluations[best];
      const double se_ref = opts.se_mode == SeMode::RunningMax ? top.se : e.se;
      if (e.tpp < top.tpp - 2.0 * se_ref) {
        ++fails;
      } else {
        fails = 0;
      }
      if (e.tpp > top.tpp) best = i;
      if (fails >= opts.patience) {
        done = true;
        break;
      }
    }
  }
  if (res.evaluations.empty()) throw DomainError("adaptive_mtilde_search: start exceeds the cap");
  const MtildeEvaluation& top = res.evaluations[best];
  res.mtilde_hat = top.m_tilde;
  res.tpp_max = top.tpp;
  res.se_at_max = top.se;
  std::size_t lo = top.m_tilde, hi = top.m_tilde;
  for (const MtildeEvaluation& e : res.evaluations) {
    if (e.tpp >= top.tpp - 2.0 * top.se) {
      lo = std::min(lo, e.m_tilde);
      hi = std::max(hi, e.m_tilde);
    }
  }
  res.interval = Interval(static_cast<double>(lo), static_cast<double>(hi));
  return res;
}

namespace {

// TPP of BONuS with the mean learner for every requested pool size, sharing
// one dataset and one nested null pool. Scores are left unnormalized: a
// common positive factor does not change the rank-based calibration.
std::vector<double> mean_learner_path(const Dataset& data, const Matrix& nulls,
                                      const std::vector<std::size_t>& m_tildes, double q) {
  const Prior prior = data.params.prior;
  const std::size_t lo = m_tildes.front(), hi = m_tildes.back();
  const auto elo = static_cast<Eigen::Index>(lo), ehi = static_cast<Eigen::Index>(hi);
  Vector dir = data.X.colwise().sum().transpose();
  if (lo > 0) dir += nulls.topRows(elo).colwise().sum().transpose();
  Vector S = data.X * dir;
  Vector T = nulls.topRows(ehi) * dir;
  Matrix K, N;
  if (hi > lo) {
    const auto fresh = nulls.middleRows(elo, ehi - elo);
    K = data.X * fresh.transpose();
    N = nulls.topRows(ehi) * fresh.transpose();
  }
  std::vector<double> out;
  out.reserve(m_tildes.size());
  std::size_t cur = lo;
  for (std::size_t mt : m_tildes) {
    while (cur < mt) {
      const auto col = static_cast<Eigen::Index>(cur - lo);
      S += K.col(col);
      T += N.col(col);
      ++cur;
    }
    Vector scores = S;
    std::vector<double> pool(T.data(), T.data() + mt);
    if (prior == Prior::Subspace) {
      scores = scores.array().square();
      for (double& x : pool) x *= x;
    }
    const Calibration cal = calibrate_threshold(scores, bonus_fdp_estimate(std::move(pool), data.m()), q);
    std::size_t tp = 0;
    for (std::size_t j : cal.rejected) tp += data.nonnull(j) ? 1 : 0;
    out.push_back(static_cast<double>(tp) / static_cast<double>(std::max<std::size_t>(1, data.num_nonnull())));
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> bonus_tpp_path_by_rep(const ModelParams& params, LearnerKind learner,
                                                       const std::vector<std::size_t>& m_tildes,
                                                       std::size_t reps, std::uint64_t base_seed,
                                                       std::uint64_t cell, std::size_t threads) {
  if (m_tildes.empty()) return {};
  if (!std::is_sorted(m_tildes.begin(), m_tildes.end()) || m_tildes.front() < 1) {
    throw DomainError("bonus_tpp_path: pool sizes must be ascending and >= 1");
  }
  std::vector<std::vector<double>> tpp(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    const RngStream stream(base_seed, {cell, r});
    const Dataset data = generate_dataset(params, stream.child(0));
    const RngStream pool_stream = stream.child(1);
    if (learner == LearnerKind::Mean) {
      const Matrix nulls = draw_null_rows(m_tildes.back(), data.d(), pool_stream);
      tpp[r] = mean_learner_path(data, nulls, m_tildes, params.q);
    } else {
      for (std::size_t mt : m_tildes) tpp[r].push_back(bonus(data, mt, learner, params.q, pool_stream).tpp);
    }
  });
  return tpp;
}

std::vector<MtildeEvaluation> bonus_tpp_path(const ModelParams& params, LearnerKind learner,
                                             const std::vector<std::size_t>& m_tildes, std::size_t reps,
                                             std::uint64_t base_seed, std::uint64_t cell, std::size_t threads) {
  const auto by_rep = bonus_tpp_path_by_rep(params, learner, m_tildes, reps, base_seed, cell, threads);
  std::vector<MtildeEvaluation> out;
  for (std::size_t i = 0; i < m_tildes.size(); ++i) {
    std::vector<double> col(reps);
    for (std::size_t r = 0; r < reps; ++r) col[r] = by_rep[r][i];
    const MeanSe ms = mean_se(col);
    out.push_back({m_tildes[i], ms.mean, ms.se});
  }
  return out;
}

MtildeSearchResult adaptive_mtilde_search(std::size_t m, const ModelParams& params, double q, std::size_t reps,
                                          const MtildeSearchOptions& opts, std::uint64_t base_seed,
                                          std::uint64_t cell, std::size_t threads, LearnerKind learner) {
  if (reps < 100) throw DomainError("adaptive_mtilde_search: reps must be >= 100");
  const ModelParams p = ModelParams::make(params.prior, params.gamma, params.c(), params.h, m, q);
  return adaptive_mtilde_search(
      m,
      [&](const std::vector<std::size_t>& block) {
        return bonus_tpp_path(p, learner, block, reps, base_seed, cell, threads);
      },
      opts);
}

SlopeFit loglog_slope_fit(const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 3) throw DomainError("loglog_slope_fit: need at least 3 points");
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(points[i].first > 0.0 && points[i].second > 0.0)) {
      throw DomainError("loglog_slope_fit: coordinates must be positive");
    }
    x[i] = std::log(points[i].first);
    y[i] = std::log(points[i].second);
  }
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 1e-12)) throw DomainError("loglog_slope_fit: x values have no spread");
  SlopeFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    sse += e * e;
  }
  fit.se_slope = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double tq = boost::math::quantile(dist, 0.975);
  fit.ci = Interval(fit.slope - tq * fit.se_slope, fit.slope + tq * fit.se_slope);
  return fit;
}

std::vector<std::size_t> log_spaced_counts(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi >= lo) || n < 1) throw DomainError("log_spaced_counts: invalid range");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(static_cast<std::size_t>(std::llround(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))))));
  }
  return out;
}

ScalingResult mtilde_scaling(const ModelParams& base, const std::vector<std::size_t>& m_values, std::size_t reps,
                             const MtildeSearchOptions& opts, std::uint64_t base_seed, std::size_t threads) {
  ScalingResult out;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    out.searches.push_back(adaptive_mtilde_search(m_values[i], base, base.q, reps, opts, base_seed, i, threads));
    pts.emplace_back(static_cast<double>(m_values[i]), static_cast<double>(out.searches.back().mtilde_hat));
  }
  out.fit = loglog_slope_fit(pts);
  out.coeffs = base.prior == Prior::PointMass ? expansion_coeffs_point(base.gamma, base.c(), base.h, base.q)
                                              : expansion_coeffs_subspace(base.gamma, base.c(), base.h, base.q);
  return out;
}

}  // namespace ltt
