#pragma once

#include <span>
#include <utility>
#include <vector>

namespace lensdepth::stats {

double normal_cdf(double x);
double normal_quantile(double p);
double student_t_cdf(double x, double v);
double student_t_quantile(double p, double v);

double mean(std::span<const double> xs);
// Sample variance with denominator n - 1.
double variance(std::span<const double> xs);
// Type-7 (linear interpolation) quantile; q in [0, 1].
double quantile(std::vector<double> xs, double q);
inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

}  // namespace lensdepth::stats
