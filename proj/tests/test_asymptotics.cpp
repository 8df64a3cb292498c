#include <gtest/gtest.h>

#include <cmath>

#include "lensdepth/asymptotics.hpp"
#include "lensdepth/error.hpp"
#include "lensdepth/parallel.hpp"
#include "lensdepth/stats.hpp"

using namespace lensdepth;
using nlohmann::json;

namespace {

ExperimentConfig small_config(std::string experiment) {
    ExperimentConfig cfg;
    cfg.experiment = std::move(experiment);
    cfg.n_schedule = {50, 200};
    cfg.replications = 8;
    cfg.seed = 42;
    cfg.grid = "-2:2:0.05";
    return cfg;
}

Point at(double x) { return RealVector{{x}}; }

}  // namespace

TEST(Config, ParsesAndValidates) {
    const json j = {{"experiment", "levelset"}, {"sampler", {{"dist", "normal"}, {"mu", 0}, {"sigma", 1}}},
                    {"n", {10, 20}}, {"replications", 3}, {"seed", 9}, {"grid", "-1:1:0.5"}, {"lambda", 0.2}};
    const ExperimentConfig cfg = parse_experiment_config(j);
    EXPECT_EQ(cfg.experiment, "levelset");
    EXPECT_EQ(cfg.n_schedule, (std::vector<std::size_t>{10, 20}));
    EXPECT_EQ(cfg.replications, 3u);
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.lambda, 0.2);
    EXPECT_EQ(parse_experiment_config(cfg.to_json()).to_json(), cfg.to_json());
    EXPECT_THROW(parse_experiment_config({{"experiment", "supnorm"}, {"bogus", 1}}), DomainError);
}

TEST(Config, RejectsBrokenInvariants) {
    ExperimentConfig cfg = small_config("supnorm");
    cfg.n_schedule = {100, 100};
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg.n_schedule = {};
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = small_config("supnorm");
    cfg.replications = 0;
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = small_config("bootstrap");
    EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(Supnorm, PointMassHasNoError) {
    ExperimentConfig cfg = small_config("supnorm");
    cfg.sampler = {{"dist", "point_mass"}, {"at", {0.5}}};
    cfg.grid = "0:1:0.25";
    const auto rep = supnorm_experiment(cfg);
    ASSERT_EQ(rep.series.size(), 1u);
    for (const auto& row : rep.series[0].values)
        for (double v : row) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(rep.series[0].per_n.size(), 2u);
    EXPECT_EQ(rep.series[0].per_n[0].replications, 8u);
}

TEST(Supnorm, NormalErrorShrinks) {
    ExperimentConfig cfg = small_config("supnorm");
    cfg.n_schedule = {50, 800};
    cfg.replications = 20;
    const auto rep = supnorm_experiment(cfg);
    const auto& s = rep.series[0];
    EXPECT_TRUE(s.strictly_decreasing);
    EXPECT_GT(s.ratios[0], 2.0);  // sqrt(16) = 4 in expectation
}

TEST(Supnorm, MonteCarloOracleWithoutClosedForm) {
    ExperimentConfig cfg = small_config("supnorm");
    cfg.sampler = {{"dist", "mvnormal"}, {"dim", 2}, {"sigma", 1}};
    cfg.grid = "";
    cfg.queries = {{0, 0}, {1, 0}};
    cfg.oracle_pairs = 20000;
    const auto rep = supnorm_experiment(cfg);
    EXPECT_EQ(rep.series[0].per_n.size(), 2u);
    for (const auto& st : rep.series[0].per_n) EXPECT_LT(st.max, 0.5);
}

TEST(Levelset, LambdaZeroGivesZeroDistance) {
    ExperimentConfig cfg = small_config("levelset");
    cfg.lambda = 0.0;
    const auto rep = levelset_experiment(cfg);
    ASSERT_EQ(rep.series.size(), 2u);
    for (const auto& row : rep.series[0].values)
        for (double v : row) EXPECT_EQ(v, 0.0);
}

TEST(Levelset, TrueEndpointsFromQuantiles) {
    const double tail = (1 - std::sqrt(0.4)) / 2;
    // F(1 - F) = 0.15 puts the endpoints at -+0.9011, not -+0.8871
    EXPECT_NEAR(stats::normal_quantile(tail), -0.90108, 1e-5);
    ExperimentConfig cfg = small_config("levelset");
    cfg.n_schedule = {100, 1600};
    cfg.replications = 10;
    const auto rep = levelset_experiment(cfg);
    EXPECT_TRUE(rep.series[0].nonincreasing);
    EXPECT_LT(rep.series[0].per_n[1].median, 0.3);
}

TEST(Levelset, LambdaAboveMaximumDepth) {
    ExperimentConfig cfg = small_config("levelset");
    cfg.lambda = 0.6;
    EXPECT_THROW(levelset_experiment(cfg), DomainError);
}

TEST(P2, Examples) {
    const auto mass = make_sampler({{"dist", "point_mass"}, {"at", {1.0}}});
    const P2Estimate m = p2_functional(at(1.0), at(3.0), *mass, 1000, 1);
    EXPECT_EQ(m.p1, 1.0);
    EXPECT_EQ(m.p2, 0.0);
    EXPECT_EQ(m.p12, 0.0);

    const auto normal = make_sampler({{"dist", "normal"}, {"mu", 0}, {"sigma", 1}});
    const P2Estimate same = p2_functional(at(0.4), at(0.4), *normal, 100000, 2);
    EXPECT_EQ(same.p1, same.p12);
    EXPECT_EQ(same.p1, same.p2);
    const P2Estimate z = p2_functional(at(0.0), at(1.0), *normal, 1000000, 3);
    EXPECT_NEAR(z.p1, 0.5, 0.002);
    const double f1 = stats::normal_cdf(1.0);
    EXPECT_NEAR(z.p2, 2 * f1 * (1 - f1), 0.002);
    // on the line the lens of (a, b) is [a, b], so P(0 and 1 in lens) = 2 F(0) (1 - F(1))
    EXPECT_NEAR(z.p12, 2 * 0.5 * (1 - f1), 0.002);
}

TEST(P2, TargetIsSymmetricPsd) {
    const auto normal = make_sampler({{"dist", "normal"}, {"mu", 0}, {"sigma", 1}});
    const std::vector<Point> pts{at(-0.5), at(0.0), at(1.0)};
    const P2Matrix m = p2_matrix(pts, *normal, 200000, 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_EQ(m.target[i][j], m.target[j][i]);
    // 2x2 principal minors nonnegative within MC error
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            EXPECT_GE(m.target[i][i] * m.target[j][j] - m.target[i][j] * m.target[i][j], -0.01);
    EXPECT_THROW(p2_matrix(pts, *normal, 0, 4), DomainError);
}

TEST(Clt, NeedsEnoughReplications) {
    ExperimentConfig cfg = small_config("clt");
    cfg.queries = {{0.0}};
    cfg.replications = 499;
    EXPECT_THROW(clt_experiment(cfg), DomainError);
    cfg.replications = 500;
    cfg.queries.clear();
    EXPECT_THROW(clt_experiment(cfg), DomainError);
}

TEST(Clt, ZeroCoverageRegion) {
    ExperimentConfig cfg = small_config("clt");
    cfg.sampler = {{"dist", "uniform"}, {"a", 0}, {"b", 1}};
    cfg.queries = {{5.0}};
    cfg.n_schedule = {40};
    cfg.replications = 500;
    cfg.oracle_pairs = 10000;
    const CltReport rep = clt_experiment(cfg);
    EXPECT_EQ(rep.per_n[0].empirical[0][0], 0.0);
    EXPECT_EQ(rep.per_n[0].oracle.target[0][0], 0.0);
}

TEST(Reproducibility, BitIdenticalAcrossThreadCounts) {
    ExperimentConfig cfg = small_config("supnorm");
    std::string first;
    for (int threads : {1, 4, 8}) {
        set_thread_count(threads);
        const std::string dump = run_experiment(cfg).dump();
        if (first.empty())
            first = dump;
        else
            EXPECT_EQ(dump, first) << threads << " threads";
    }
    cfg = small_config("levelset");
    first.clear();
    for (int threads : {1, 3}) {
        set_thread_count(threads);
        const std::string dump = run_experiment(cfg).dump();
        if (first.empty())
            first = dump;
        else
            EXPECT_EQ(dump, first);
    }
    set_thread_count(0);
}

TEST(Report, JsonCarriesFlagsAndRateNote) {
    const json j = run_experiment(small_config("supnorm"));
    EXPECT_EQ(j["experiment"], "supnorm");
    const json& s = j["series"][0];
    EXPECT_TRUE(s.contains("median_nonincreasing"));
    EXPECT_TRUE(s.contains("rate_note"));
    EXPECT_EQ(s["per_n"].size(), 2u);
}
