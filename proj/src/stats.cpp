#include "lensdepth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "lensdepth/error.hpp"

namespace lensdepth::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double student_t_cdf(double x, double v) {
    if (!(v > 0.0)) throw DomainError("student_t_cdf: degrees of freedom must be positive");
    return boost::math::cdf(boost::math::students_t_distribution<double>(v), x);
}

double student_t_quantile(double p, double v) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("student_t_quantile: p must lie in (0, 1)");
    if (!(v > 0.0)) throw DomainError("student_t_quantile: degrees of freedom must be positive");
    return boost::math::quantile(boost::math::students_t_distribution<double>(v), p);
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("mean of empty sequence");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw DomainError("variance needs at least two values");
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw DomainError("quantile of empty sequence");
    std::sort(xs.begin(), xs.end());
    const double h = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace lensdepth::stats
