#pragma once

#include <vector>

namespace clic {

/// 1-based ranks; ties receive the average of the positions they span.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Pearson correlation coefficient. Throws ShapeMismatch on length
/// disagreement, InsufficientData below two samples, DegenerateVariance when
/// either argument is constant.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Spearman rank correlation: pearson applied to average ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace clic
