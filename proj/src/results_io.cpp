#include "ltt/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ltt {

std::string fmt6(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string fmt6(const std::optional<double>& x) { return x ? fmt6(*x) : std::string(); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path);
}

namespace {

std::string join_notes(const std::vector<std::string>& notes) {
  std::string s;
  for (std::size_t i = 0; i < notes.size(); ++i) s += (i ? ";" : "") + notes[i];
  return s;
}

}  // namespace

std::string power_curve_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream os;
  os << "prior,method,learner,tuning_name,tuning_value,h,reps,n_failed,mean_tpp,se_tpp,mean_fdp,se_fdp,theory_tpr,q\n";
  for (const auto& r : records) {
    os << r.prior << ',' << r.method << ',' << r.learner << ',' << r.tuning_name << ',' << fmt6(r.tuning_value) << ','
       << fmt6(r.h) << ',' << r.reps << ',' << r.n_failed << ',' << fmt6(r.mean_tpp) << ',' << fmt6(r.se_tpp) << ','
       << fmt6(r.mean_fdp) << ',' << fmt6(r.se_fdp) << ',' << fmt6(r.theory_tpr) << ',' << fmt6(r.q) << '\n';
  }
  return os.str();
}

std::string theory_csv(const std::vector<TheoryPoint>& points) {
  std::ostringstream os;
  os << "prior,method,pi,tau,mu,tpr\n";
  for (const auto& p : points) {
    os << to_string(p.prior) << ',' << to_string(p.method) << ',' << fmt6(p.pi) << ',' << fmt6(p.tau) << ','
       << fmt6(p.mu) << ',' << fmt6(p.tpr) << '\n';
  }
  return os.str();
}

std::string align_curve_csv(const std::vector<AlignmentRecord>& records) {
  std::ostringstream os;
  os << "prior,learner,masking,pi,reps,n_unconverged,mean_alignment,se_alignment,theory_alignment,q\n";
  for (const auto& r : records) {
    os << r.prior << ',' << r.learner << ',' << r.masking << ',' << fmt6(r.pi) << ',' << r.reps << ','
       << r.n_unconverged << ',' << fmt6(r.mean_alignment) << ',' << fmt6(r.se_alignment) << ','
       << fmt6(r.theory_alignment) << ',' << fmt6(r.q) << '\n';
  }
  return os.str();
}

std::string mtilde_summary_csv(const std::vector<MtildeSearchResult>& results, const ExpansionCoeffs& coeffs,
                               double q) {
  std::ostringstream os;
  os << "m,mtilde_hat,tpp_max,se_at_max,interval_lo,interval_hi,n_evaluations,forced_stop,mtilde_conjectured,q\n";
  for (const auto& r : results) {
    os << r.m << ',' << r.mtilde_hat << ',' << fmt6(r.tpp_max) << ',' << fmt6(r.se_at_max) << ','
       << fmt6(r.interval.lo) << ',' << fmt6(r.interval.hi) << ',' << r.evaluations.size() << ','
       << (r.forced_stop ? 1 : 0) << ','
       << fmt6(std::sqrt(coeffs.eta1 / coeffs.eta2) * std::sqrt(static_cast<double>(r.m))) << ',' << fmt6(q)
       << '\n';
  }
  return os.str();
}

std::string mtilde_evaluations_csv(const std::vector<MtildeSearchResult>& results) {
  std::ostringstream os;
  os << "m,m_tilde,tpp,se\n";
  for (const auto& r : results) {
    for (const auto& e : r.evaluations) {
      os << r.m << ',' << e.m_tilde << ',' << fmt6(e.tpp) << ',' << fmt6(e.se) << '\n';
    }
  }
  return os.str();
}

std::string mtilde_fit_csv(const SlopeFit& fit, double q) {
  std::ostringstream os;
  os << "slope,intercept,se_slope,ci_lo,ci_hi,n_points,conjectured_slope,q\n";
  os << fmt6(fit.slope) << ',' << fmt6(fit.intercept) << ',' << fmt6(fit.se_slope) << ',' << fmt6(fit.ci.lo) << ','
     << fmt6(fit.ci.hi) << ',' << fit.n << ',' << fmt6(0.5) << ',' << fmt6(q) << '\n';
  return os.str();
}

std::string knockoff_compare_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream os;
  os << "prior,method,learner,h,tuning_name,tuning_value,reps,n_failed,mean_tpp,se_tpp,mean_fdp,se_fdp,q,notes\n";
  for (const auto& r : records) {
    os << r.prior << ',' << r.method << ',' << r.learner << ',' << fmt6(r.h) << ',' << r.tuning_name << ','
       << fmt6(r.tuning_value) << ',' << r.reps << ',' << r.n_failed << ',' << fmt6(r.mean_tpp) << ','
       << fmt6(r.se_tpp) << ',' << fmt6(r.mean_fdp) << ',' << fmt6(r.se_fdp) << ',' << fmt6(r.q) << ','
       << join_notes(r.notes) << '\n';
  }
  return os.str();
}

}  // namespace ltt
