#include <gtest/gtest.h>

#include <numbers>

#include "lensdepth/error.hpp"
#include "lensdepth/metrics.hpp"
#include "lensdepth/parallel.hpp"
#include "test_util.hpp"

using namespace lensdepth;

TEST(Distance, EuclideanPythagoras) {
    EXPECT_DOUBLE_EQ(distance(RealVector{{0, 0}}, RealVector{{3, 4}}, MetricSpace::euclidean(2)), 5.0);
}

TEST(Distance, SphereQuarterTurn) {
    const double d = distance(make_unit_vector({0, 0, 1}), make_unit_vector({1, 0, 0}), MetricSpace::sphere(3));
    EXPECT_NEAR(d, std::numbers::pi / 2, 1e-15);
}

TEST(Distance, SphereAntipodalIsPi) {
    const double d = distance(make_unit_vector({0, 0, 1}), make_unit_vector({0, 0, -1}), MetricSpace::sphere(3));
    EXPECT_DOUBLE_EQ(d, std::numbers::pi);
}

TEST(Distance, SphereMatchesClampedArccos) {
    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        const auto p = std::get<UnitVector>(testutil::unit(rng, 3));
        const auto q = std::get<UnitVector>(testutil::unit(rng, 3));
        double dot = 0.0;
        for (int i = 0; i < 3; ++i) dot += p.coords[i] * q.coords[i];
        EXPECT_NEAR(distance(p, q, MetricSpace::sphere(3)), std::acos(std::clamp(dot, -1.0, 1.0)), 1e-7);
    }
}

TEST(Distance, SelfDistanceIsZeroInEverySpace) {
    Rng rng(1);
    for (const MetricSpace& space : {MetricSpace::euclidean(3), MetricSpace::sphere(3), MetricSpace::stiefel(3, 2),
                                     MetricSpace::stiefel(3, 2, StiefelMode::procrustes), MetricSpace::bhv(5)}) {
        const Point p = testutil::point_of(space, rng);
        EXPECT_EQ(distance(p, p, space), 0.0) << space.describe();
    }
}

TEST(Distance, MismatchNamesBothOperands) {
    try {
        distance(RealVector{{0, 0}}, RealVector{{0, 0, 0}}, MetricSpace::euclidean(2));
        FAIL();
    } catch (const MismatchError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("RealVector[2]"), std::string::npos);
        EXPECT_NE(what.find("RealVector[3]"), std::string::npos);
    }
    EXPECT_THROW(distance(make_unit_vector({1, 0}), make_unit_vector({0, 1}), MetricSpace::euclidean(2)), MismatchError);
}

TEST(Validation, UnitVectorNorm) {
    EXPECT_THROW(make_unit_vector({1.0, 1e-4}), ValidationError);
    EXPECT_NO_THROW(make_unit_vector({1.0, 1e-5 * 1e-5}));
    EXPECT_THROW(normalized({0.0, 0.0}), DomainError);
}

TEST(Validation, FrameOrthonormality) {
    EXPECT_THROW(make_frame(3, 2, {1, 1, 0, 1, 0, 0}), ValidationError);
    EXPECT_NO_THROW(make_frame(3, 2, {1, 0, 0, 1, 0, 0}));
    EXPECT_THROW(make_frame(2, 3, {1, 0, 0, 0, 1, 0}), ValidationError);
}

TEST(Stiefel, ChordalOneColumnDiffers) {
    const Frame a = make_frame(3, 2, {1, 0, 0, 1, 0, 0});  // e1 e2
    const Frame b = make_frame(3, 2, {1, 0, 0, 0, 0, 1});  // e1 e3
    EXPECT_NEAR(stiefel_distance(a, b, StiefelMode::chordal), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(stiefel_distance(a, a, StiefelMode::chordal), 0.0);
    EXPECT_EQ(stiefel_distance(a, a, StiefelMode::procrustes), 0.0);
}

TEST(Stiefel, ProcrustesIgnoresRightRotation) {
    Rng rng(9);
    const Frame a = std::get<Frame>(testutil::frame(rng, 3, 2));
    const double c = std::cos(0.7), s = std::sin(0.7);
    std::vector<double> rotated(6);
    for (int r = 0; r < 3; ++r) {
        rotated[r * 2] = c * a(r, 0) + s * a(r, 1);
        rotated[r * 2 + 1] = -s * a(r, 0) + c * a(r, 1);
    }
    const Frame b = make_frame(3, 2, rotated);
    EXPECT_NEAR(stiefel_distance(a, b, StiefelMode::procrustes), 0.0, 1e-12);
    EXPECT_GT(stiefel_distance(a, b, StiefelMode::chordal), 0.1);
}

TEST(Stiefel, ProcrustesNeverExceedsChordal) {
    Rng rng(11);
    for (int k = 0; k < 500; ++k) {
        const Frame a = std::get<Frame>(testutil::frame(rng, 3, 2));
        const Frame b = std::get<Frame>(testutil::frame(rng, 3, 2));
        EXPECT_LE(stiefel_distance(a, b, StiefelMode::procrustes), stiefel_distance(a, b, StiefelMode::chordal) + 1e-12);
    }
}

TEST(Stiefel, ShapeMismatch) {
    const Frame a = make_frame(3, 2, {1, 0, 0, 1, 0, 0});
    const Frame b = make_frame(3, 1, {1, 0, 0});
    EXPECT_THROW(stiefel_distance(a, b, StiefelMode::chordal), MismatchError);
}

TEST(PairwiseMatrix, LineExample) {
    const auto pts = testutil::line_points({0, 1, 2});
    const DistanceMatrix m = pairwise_matrix(pts, MetricSpace::euclidean(1));
    const double expect[3][3] = {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_EQ(m(i, j), expect[i][j]);
}

TEST(PairwiseMatrix, SinglePoint) {
    const auto pts = testutil::line_points({4});
    const DistanceMatrix m = pairwise_matrix(pts, MetricSpace::euclidean(1));
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m(0, 0), 0.0);
}

TEST(PairwiseMatrix, TriangleInequalityOnAllTriples) {
    Rng rng(3);
    std::vector<Point> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(testutil::real(rng, 3));
    const DistanceMatrix m = pairwise_matrix(pts, MetricSpace::euclidean(3));
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j)
            for (int k = 0; k < 20; ++k) EXPECT_LE(m(i, k), m(i, j) + m(j, k) + 1e-12);
}

TEST(PairwiseMatrix, MatchesElementwiseAtAnyThreadCount) {
    Rng rng(4);
    const MetricSpace space = MetricSpace::bhv(6);
    std::vector<Point> pts;
    for (int i = 0; i < 25; ++i) pts.push_back(testutil::point_of(space, rng));
    for (int threads : {1, 3, 8}) {
        set_thread_count(threads);
        const DistanceMatrix m = pairwise_matrix(pts, space);
        for (int i = 0; i < 25; ++i)
            for (int j = 0; j < 25; ++j) {
                ASSERT_EQ(m(i, j), m(j, i));
                ASSERT_EQ(m(i, j), i == j ? 0.0 : distance(pts[i], pts[j], space));
            }
    }
    set_thread_count(0);
}

TEST(PairwiseMatrix, ErrorsNameTheIndexPair) {
    std::vector<Point> pts = testutil::line_points({0, 1});
    pts.push_back(RealVector{{0, 0}});
    try {
        pairwise_matrix(pts, MetricSpace::euclidean(1));
        FAIL();
    } catch (const MismatchError& e) {
        EXPECT_NE(std::string(e.what()).find("points"), std::string::npos);
    }
}

TEST(MetricKindNames, RoundTrip) {
    for (const char* name : {"euclidean", "sphere", "stiefel-chordal", "stiefel-procrustes", "bhv"})
        EXPECT_EQ(to_string(parse_metric_kind(name)), name);
    EXPECT_THROW(parse_metric_kind("manhattan"), DomainError);
}

class MetricAxioms : public ::testing::TestWithParam<MetricSpace> {};

TEST_P(MetricAxioms, HoldOnRandomTriples) {
    const MetricSpace space = GetParam();
    Rng rng(substream_seed(17, {static_cast<std::uint64_t>(space.kind)}));
    for (int k = 0; k < 200; ++k) {
        const Point p = testutil::point_of(space, rng), q = testutil::point_of(space, rng),
                    r = testutil::point_of(space, rng);
        const double pq = distance(p, q, space), qp = distance(q, p, space);
        const double qr = distance(q, r, space), pr = distance(p, r, space);
        ASSERT_GE(pq, 0.0);
        ASSERT_EQ(pq, qp);
        ASSERT_EQ(distance(p, p, space), 0.0);
        ASSERT_LE(pr, pq + qr + 1e-9);
        if (space.kind == MetricKind::sphere) ASSERT_LE(pq, std::numbers::pi);
    }
}

INSTANTIATE_TEST_SUITE_P(AllSpaces, MetricAxioms,
                         ::testing::Values(MetricSpace::euclidean(3), MetricSpace::sphere(3), MetricSpace::stiefel(3, 2),
                                           MetricSpace::stiefel(3, 2, StiefelMode::procrustes), MetricSpace::bhv(5)));
