#pragma once

#include "ltt/experiments.hpp"
#include "ltt/theory.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ltt {

// Six significant digits, the format used by every results CSV.
std::string fmt6(double x);
std::string fmt6(const std::optional<double>& x);

void write_text_file(const std::string& path, const std::string& content);

std::string power_curve_csv(const std::vector<ExperimentRecord>& records);
std::string theory_csv(const std::vector<TheoryPoint>& points);
std::string align_curve_csv(const std::vector<AlignmentRecord>& records);
std::string mtilde_summary_csv(const std::vector<MtildeSearchResult>& results, const ExpansionCoeffs& coeffs, double q);
std::string mtilde_evaluations_csv(const std::vector<MtildeSearchResult>& results);
std::string mtilde_fit_csv(const SlopeFit& fit, double q);
std::string knockoff_compare_csv(const std::vector<ExperimentRecord>& records);

}  // namespace ltt
