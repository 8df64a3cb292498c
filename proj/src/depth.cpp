#include "lensdepth/depth.hpp"

#include <algorithm>

#include "lensdepth/error.hpp"
#include "lensdepth/parallel.hpp"

namespace lensdepth {

Sample::Sample(std::vector<Point> points, MetricSpace space) : points_(std::move(points)), space_(space) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        try {
            check_member(points_[i], space_);
        } catch (const MismatchError& e) {
            throw MismatchError("sample point " + std::to_string(i) + ": " + e.what());
        }
    }
}

void Sample::build_cache() {
    if (!cache_) cache_ = pairwise_matrix(points_, space_);
}

double Sample::pair_distance(std::size_t i, std::size_t j) const {
    if (cache_) return (*cache_)(i, j);
    return distance(points_[i], points_[j], space_);
}

bool in_lens(const Point& x, const Point& y1, const Point& y2, const MetricSpace& space) {
    const double span = distance(y1, y2, space);
    return distance(x, y1, space) <= span && distance(x, y2, space) <= span;
}

double empirical_lens_depth(const Point& x, const Sample& sample) {
    const std::size_t n = sample.size();
    if (n < 2) throw DomainError("empirical_lens_depth: sample size must be at least 2");
    std::vector<double> to_x(n);
    for (std::size_t i = 0; i < n; ++i) to_x[i] = distance(x, sample[i], sample.space());
    std::uint64_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double span = sample.pair_distance(i, j);
            if (to_x[i] <= span && to_x[j] <= span) ++hits;
        }
    return static_cast<double>(hits) / pair_count(n);
}

namespace {

std::uint64_t choose2(std::uint64_t k) { return k < 2 ? 0 : k * (k - 1) / 2; }

// On the real line A(a, b) = [min(a, b), max(a, b)], so the pairs missing x
// are those with both ends strictly on one side of it.
std::vector<double> line_depths(std::span<const Point> queries, const Sample& sample) {
    std::vector<double> sorted;
    sorted.reserve(sample.size());
    for (const Point& p : sample.points()) sorted.push_back(std::get<RealVector>(p).coords[0]);
    std::sort(sorted.begin(), sorted.end());
    const std::uint64_t n = sorted.size();
    std::vector<double> out(queries.size());
    parallel_for(queries.size(), [&](std::size_t q) {
        check_member(queries[q], sample.space());
        const double x = std::get<RealVector>(queries[q]).coords[0];
        const auto below = static_cast<std::uint64_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
        const auto above = static_cast<std::uint64_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x));
        const std::uint64_t hits = choose2(n) - choose2(below) - choose2(above);
        out[q] = static_cast<double>(hits) / pair_count(n);
    });
    return out;
}

std::vector<double> cached_depths(std::span<const Point> queries, const Sample& sample) {
    const DistanceMatrix& pairs = *sample.cache();
    const std::size_t n = sample.size();
    std::vector<double> out(queries.size());
    parallel_for(queries.size(), [&](std::size_t q) {
        std::vector<double> to_x(n);
        for (std::size_t i = 0; i < n; ++i) to_x[i] = distance(queries[q], sample[i], sample.space());
        std::uint64_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = to_x[i];
            const std::span<const double> row = pairs.row(i);
            for (std::size_t j = i + 1; j < n; ++j) {
                const double span = row[j];
                hits += static_cast<std::uint64_t>(xi <= span && to_x[j] <= span);
            }
        }
        out[q] = static_cast<double>(hits) / pair_count(n);
    });
    return out;
}

}  // namespace

std::vector<double> batch_depth_values(std::span<const Point> queries, const Sample& sample) {
    if (sample.size() < 2) throw DomainError("batch_depth: sample size must be at least 2");
    if (queries.empty()) throw DomainError("batch_depth: no query points");
    if (sample.space().kind == MetricKind::euclidean && sample.space().dim == 1) return line_depths(queries, sample);
    if (sample.cache()) return cached_depths(queries, sample);
    Sample cached = sample;
    cached.build_cache();
    return cached_depths(queries, cached);
}

DepthField batch_depth(std::vector<Point> queries, const Sample& sample) {
    DepthField field;
    field.values = batch_depth_values(queries, sample);
    field.points = std::move(queries);
    field.sample_size = sample.size();
    field.space = sample.space();
    return field;
}

double population_ld_mc(const Point& x, const PointGenerator& sampler, const MetricSpace& space,
                        std::uint64_t pairs, std::uint64_t seed) {
    if (pairs == 0) throw DomainError("population_ld_mc: pairs must be at least 1");
    constexpr std::uint64_t kBlock = 4096;
    const std::uint64_t blocks = (pairs + kBlock - 1) / kBlock;
    std::vector<std::uint64_t> hits(blocks, 0);
    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = substream(seed, {0x1d, b});
        const std::uint64_t todo = std::min(kBlock, pairs - b * kBlock);
        std::uint64_t h = 0;
        for (std::uint64_t k = 0; k < todo; ++k) {
            const Point y1 = sampler(rng);
            const Point y2 = sampler(rng);
            h += in_lens(x, y1, y2, space) ? 1 : 0;
        }
        hits[b] = h;
    });
    std::uint64_t total = 0;
    for (auto h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(pairs);
}

}  // namespace lensdepth
