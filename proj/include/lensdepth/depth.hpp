#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lensdepth/metrics.hpp"
#include "lensdepth/random.hpp"

namespace lensdepth {

// An iid sample in a metric space, optionally with its distance matrix.
class Sample {
public:
    // Validates that every point belongs to `space`.
    Sample(std::vector<Point> points, MetricSpace space);

    const std::vector<Point>& points() const noexcept { return points_; }
    const Point& operator[](std::size_t i) const { return points_[i]; }
    std::size_t size() const noexcept { return points_.size(); }
    const MetricSpace& space() const noexcept { return space_; }

    void build_cache();
    const DistanceMatrix* cache() const noexcept { return cache_ ? &*cache_ : nullptr; }

    double pair_distance(std::size_t i, std::size_t j) const;

private:
    std::vector<Point> points_;
    MetricSpace space_;
    std::optional<DistanceMatrix> cache_;
};

// Closed-ball lens: d(x, y1) <= d(y1, y2) and d(x, y2) <= d(y1, y2).
bool in_lens(const Point& x, const Point& y1, const Point& y2, const MetricSpace& space);

inline double pair_count(std::size_t n) { return static_cast<double>(n) * static_cast<double>(n - 1) / 2.0; }

// Fraction of the n(n-1)/2 sample pairs whose lens contains x.
double empirical_lens_depth(const Point& x, const Sample& sample);

struct DepthField {
    std::vector<Point> points;
    std::vector<double> values;
    std::size_t sample_size = 0;
    MetricSpace space;
    // Values at sample points exclude the pairs involving that point.
    bool leave_one_out = false;
};

// values[i] == empirical_lens_depth(queries[i], sample) for every i.
// Real lines use an O(log n) order-statistics count per query; other
// spaces compute n query distances and read pair distances from the
// sample's cache (built on demand).
DepthField batch_depth(std::vector<Point> queries, const Sample& sample);
std::vector<double> batch_depth_values(std::span<const Point> queries, const Sample& sample);

// 2 F(x) (1 - F(x)) for a continuous cdf on the real line.
template <class Cdf>
double population_ld_1d(double x, Cdf&& cdf) {
    const double f = cdf(x);
    return 2.0 * f * (1.0 - f);
}

using PointGenerator = std::function<Point(Rng&)>;

// Monte Carlo estimate of P(x in A(X1, X2)) from `pairs` draws. Draws are
// split into fixed blocks with their own substreams, so the estimate
// depends only on (seed, pairs).
double population_ld_mc(const Point& x, const PointGenerator& sampler, const MetricSpace& space,
                        std::uint64_t pairs, std::uint64_t seed);

}  // namespace lensdepth
