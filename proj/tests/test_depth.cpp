#include <gtest/gtest.h>

#include <cmath>

#include "lensdepth/depth.hpp"
#include "lensdepth/error.hpp"
#include "lensdepth/parallel.hpp"
#include "lensdepth/stats.hpp"
#include "test_util.hpp"

using namespace lensdepth;

namespace {

// Direct double loop over the sample pairs.
double naive_depth(const Point& x, const std::vector<Point>& pts, const MetricSpace& space) {
    std::size_t hits = 0, pairs = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j, ++pairs) {
            const double r = distance(pts[i], pts[j], space);
            if (distance(x, pts[i], space) <= r && distance(x, pts[j], space) <= r) ++hits;
        }
    return static_cast<double>(hits) / static_cast<double>(pairs);
}

Sample line_sample(std::initializer_list<double> xs) { return Sample(testutil::line_points(xs), MetricSpace::euclidean(1)); }

Point at(double x) { return RealVector{{x}}; }
Point at2(double x, double y) { return RealVector{{x, y}}; }

}  // namespace

TEST(InLens, Examples) {
    const auto space = MetricSpace::euclidean(2);
    const Point y1 = RealVector{{0, 0}}, y2 = RealVector{{2, 0}};
    EXPECT_TRUE(in_lens(y1, y1, y2, space));
    EXPECT_TRUE(in_lens(RealVector{{1, 0}}, y1, y2, space));
    EXPECT_FALSE(in_lens(at(3), at(0), at(1), MetricSpace::euclidean(1)));
    // closed balls: the boundary point of both balls is included
    EXPECT_TRUE(in_lens(RealVector{{1, 0}}, at2(0, 0), at2(1, 0), space));
}

TEST(InLens, SpaceMismatch) {
    EXPECT_THROW(in_lens(at(0), RealVector{{0, 0}}, at(1), MetricSpace::euclidean(1)), MismatchError);
}

TEST(EmpiricalDepth, Examples) {
    EXPECT_EQ(empirical_lens_depth(at(0.3), line_sample({0.3, 5})), 1.0);
    EXPECT_EQ(empirical_lens_depth(at(3), line_sample({0, 1, 2})), 0.0);
    EXPECT_EQ(empirical_lens_depth(at(1), line_sample({0, 1, 2})), 1.0);
    EXPECT_THROW(empirical_lens_depth(at(0), line_sample({0})), DomainError);
}

TEST(BatchDepth, SamplePointsOfZeroOneTwo) {
    // Brute force: A(0,1) = [0,1], A(0,2) = [0,2], A(1,2) = [1,2], so the
    // endpoints sit in two of the three lenses.
    const Sample s = line_sample({0, 1, 2});
    const DepthField f = batch_depth(testutil::line_points({0, 1, 2}), s);
    ASSERT_EQ(f.values.size(), 3u);
    EXPECT_DOUBLE_EQ(f.values[0], 2.0 / 3.0);
    EXPECT_EQ(f.values[1], 1.0);
    EXPECT_DOUBLE_EQ(f.values[2], 2.0 / 3.0);
    EXPECT_EQ(f.sample_size, 3u);
    EXPECT_FALSE(f.leave_one_out);
}

TEST(BatchDepth, TwoPointSampleGivesZeroOrOne) {
    Rng rng(8);
    for (int k = 0; k < 50; ++k) {
        std::vector<Point> pts{testutil::real(rng, 2), testutil::real(rng, 2)};
        const Sample s(pts, MetricSpace::euclidean(2));
        const double v = batch_depth_values(std::vector<Point>{testutil::real(rng, 2)}, s)[0];
        EXPECT_TRUE(v == 0.0 || v == 1.0);
    }
}

TEST(BatchDepth, EqualsNaiveLoopExactly) {
    Rng rng(12);
    std::uniform_int_distribution<int> n_of(2, 50), d_of(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = n_of(rng), d = d_of(rng);
        std::vector<Point> pts, queries;
        for (std::size_t i = 0; i < n; ++i) pts.push_back(testutil::real(rng, d));
        for (int q = 0; q < 20; ++q) queries.push_back(q < 5 ? pts[q % n] : testutil::real(rng, d));
        const Sample s(pts, MetricSpace::euclidean(d));
        const auto values = batch_depth_values(queries, s);
        for (int q = 0; q < 20; ++q) ASSERT_EQ(values[q], naive_depth(queries[q], pts, s.space()));
    }
}

TEST(BatchDepth, TiesOnTheLineMatchNaiveLoop) {
    Rng rng(13);
    std::uniform_int_distribution<int> grid(0, 6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Point> pts, queries;
        for (int i = 0; i < 12; ++i) pts.push_back(at(grid(rng)));
        for (int q = 0; q < 10; ++q) queries.push_back(at(grid(rng) - 0.5 * (q % 2)));
        const Sample s(pts, MetricSpace::euclidean(1));
        const auto values = batch_depth_values(queries, s);
        for (int q = 0; q < 10; ++q) ASSERT_EQ(values[q], naive_depth(queries[q], pts, s.space()));
    }
}

TEST(BatchDepth, NonEuclideanSpacesMatchNaiveLoop) {
    Rng rng(14);
    for (const MetricSpace& space : {MetricSpace::sphere(3), MetricSpace::stiefel(3, 2),
                                     MetricSpace::stiefel(3, 2, StiefelMode::procrustes), MetricSpace::bhv(5)}) {
        std::vector<Point> pts, queries;
        for (int i = 0; i < 15; ++i) pts.push_back(testutil::point_of(space, rng));
        for (int q = 0; q < 10; ++q) queries.push_back(q < 3 ? pts[q] : testutil::point_of(space, rng));
        const Sample s(pts, space);
        const auto values = batch_depth_values(queries, s);
        for (int q = 0; q < 10; ++q) ASSERT_EQ(values[q], naive_depth(queries[q], pts, space)) << space.describe();
    }
}

TEST(BatchDepth, ValuesAreMultiplesOfInversePairCount) {
    Rng rng(15);
    std::vector<Point> pts;
    for (int i = 0; i < 17; ++i) pts.push_back(testutil::real(rng, 2));
    const Sample s(pts, MetricSpace::euclidean(2));
    std::vector<Point> queries;
    for (int q = 0; q < 40; ++q) queries.push_back(testutil::real(rng, 2));
    for (double v : batch_depth_values(queries, s)) {
        const double k = v * pair_count(17);
        EXPECT_NEAR(k, std::round(k), 1e-9);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(BatchDepth, IndependentOfThreadCount) {
    Rng rng(16);
    std::vector<Point> pts, queries;
    for (int i = 0; i < 60; ++i) pts.push_back(testutil::unit(rng, 3));
    for (int q = 0; q < 100; ++q) queries.push_back(testutil::unit(rng, 3));
    const Sample s(pts, MetricSpace::sphere(3));
    set_thread_count(1);
    const auto one = batch_depth_values(queries, s);
    set_thread_count(7);
    const auto seven = batch_depth_values(queries, s);
    set_thread_count(0);
    EXPECT_EQ(one, seven);
}

TEST(Sample, CacheMatchesPairwiseMatrix) {
    Rng rng(17);
    std::vector<Point> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(testutil::frame(rng, 3, 2));
    Sample s(pts, MetricSpace::stiefel(3, 2));
    s.build_cache();
    ASSERT_NE(s.cache(), nullptr);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) EXPECT_EQ((*s.cache())(i, j), distance(pts[i], pts[j], s.space()));
}

TEST(Sample, RejectsForeignPoints) {
    EXPECT_THROW(Sample({at(0), RealVector{{0, 1}}}, MetricSpace::euclidean(1)), MismatchError);
}

TEST(PopulationDepth, ClosedFormExamples) {
    EXPECT_EQ(population_ld_1d(0.0, [](double) { return 0.5; }), 0.5);
    EXPECT_EQ(population_ld_1d(0.0, [](double) { return 0.0; }), 0.0);
    EXPECT_EQ(population_ld_1d(0.0, [](double) { return 0.25; }), 0.375);
}

TEST(PopulationDepth, MonteCarloExamples) {
    const auto space = MetricSpace::euclidean(1);
    const PointGenerator mass = [](Rng&) { return at(2.0); };
    EXPECT_EQ(population_ld_mc(at(2.0), mass, space, 1000, 1), 1.0);
    const PointGenerator far = [](Rng& rng) { return at(std::uniform_real_distribution<double>(0, 1)(rng)); };
    EXPECT_EQ(population_ld_mc(at(5.0), far, space, 10000, 1), 0.0);
    const PointGenerator normal = [](Rng& rng) { return at(std::normal_distribution<double>()(rng)); };
    EXPECT_NEAR(population_ld_mc(at(0.0), normal, space, 1000000, 7), 0.5, 0.002);
    const double x = 0.8, f = stats::normal_cdf(x);
    EXPECT_NEAR(population_ld_mc(at(x), normal, space, 1000000, 8), 2 * f * (1 - f), 0.003);
}

TEST(PopulationDepth, MonteCarloIsReproducible) {
    const auto space = MetricSpace::euclidean(1);
    const PointGenerator normal = [](Rng& rng) { return at(std::normal_distribution<double>()(rng)); };
    set_thread_count(1);
    const double a = population_ld_mc(at(0.3), normal, space, 200000, 3);
    set_thread_count(6);
    const double b = population_ld_mc(at(0.3), normal, space, 200000, 3);
    set_thread_count(0);
    EXPECT_EQ(a, b);
}

TEST(Isometry, RigidMotionsPreserveDepth) {
    Rng rng(18);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 3;
        const auto rot = testutil::rotation(rng, d);
        const auto shift = testutil::gaussian(rng, d, 5.0);
        std::vector<Point> pts, moved, queries, moved_queries;
        for (int i = 0; i < 30; ++i) {
            auto v = testutil::gaussian(rng, d);
            moved.push_back(RealVector{testutil::apply(rot, v, shift)});
            pts.push_back(RealVector{std::move(v)});
        }
        for (int q = 0; q < 10; ++q) {
            auto v = testutil::gaussian(rng, d);
            moved_queries.push_back(RealVector{testutil::apply(rot, v, shift)});
            queries.push_back(RealVector{std::move(v)});
        }
        const auto space = MetricSpace::euclidean(d);
        EXPECT_EQ(batch_depth_values(queries, Sample(pts, space)), batch_depth_values(moved_queries, Sample(moved, space)));
    }
}

TEST(Stability, SmallPerturbationsNeverFlipMembership) {
    Rng rng(19);
    std::uniform_real_distribution<double> unit01(0.0, 1.0);
    const auto space = MetricSpace::euclidean(2);
    int configurations = 0;
    while (configurations < 2000) {
        const auto x = testutil::gaussian(rng, 2), y1 = testutil::gaussian(rng, 2), y2 = testutil::gaussian(rng, 2);
        const double delta = 0.05 * unit01(rng);
        const Point px = RealVector{x}, p1 = RealVector{y1}, p2 = RealVector{y2};
        const double r = distance(p1, p2, space), a = distance(px, p1, space), b = distance(px, p2, space);
        const double margin = (a <= r && b <= r) ? std::min(r - a, r - b) : std::max(a - r, b - r);
        if (margin <= 3 * delta) continue;
        ++configurations;
        const bool inside = in_lens(px, p1, p2, space);
        for (int k = 0; k < 20; ++k) {
            auto jitter = [&](const std::vector<double>& y) {
                auto dir = testutil::gaussian(rng, 2);
                const double len = std::hypot(dir[0], dir[1]);
                const double size = delta * unit01(rng) * 0.999;
                return Point{RealVector{{y[0] + size * dir[0] / len, y[1] + size * dir[1] / len}}};
            };
            ASSERT_EQ(in_lens(px, jitter(y1), jitter(y2), space), inside);
        }
    }
}
