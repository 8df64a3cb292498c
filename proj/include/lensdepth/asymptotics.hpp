#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lensdepth/metrics.hpp"
#include "lensdepth/samplers.hpp"

namespace lensdepth {

// Monte Carlo experiment description, usually loaded from JSON:
//   {"experiment": "supnorm" | "levelset" | "clt",
//    "sampler": {"dist": "normal", "mu": 0, "sigma": 1},
//    "n": [100, 400, 1600], "replications": 50, "seed": 1,
//    "grid": "-3:3:0.01", "lambda": 0.3,
//    "queries": [[0], [1]], "oracle_pairs": 1000000}
struct ExperimentConfig {
    std::string experiment = "supnorm";
    nlohmann::json sampler = {{"dist", "normal"}, {"mu", 0.0}, {"sigma", 1.0}};
    std::vector<std::size_t> n_schedule{100, 400, 1600};
    std::size_t replications = 50;
    std::uint64_t seed = 1;
    // Lattice spec "lo:hi:step,..." for Euclidean samplers; empty means the
    // evaluation set is `queries`.
    std::string grid = "-3:3:0.01";
    double lambda = 0.3;
    std::vector<std::vector<double>> queries;
    // Pair draws for Monte Carlo oracles (population depth, P2 terms).
    std::uint64_t oracle_pairs = 1000000;

    // Throws DomainError when an invariant is violated.
    void validate() const;
    nlohmann::json to_json() const;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);

struct SeriesStats {
    std::size_t n = 0;
    std::size_t replications = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// One error statistic tracked along the n schedule.
struct Series {
    std::string name;
    std::vector<SeriesStats> per_n;
    // Medians along the schedule.
    bool nonincreasing = true;
    bool strictly_decreasing = true;
    // median(n_k) / median(n_{k+1}); compare with sqrt(n_{k+1} / n_k).
    // This n^{-1/2} rate is a U-statistic heuristic, not a theorem.
    std::vector<double> ratios;
    // Raw per-replication values, indexed [n index][replication].
    std::vector<std::vector<double>> values;
};

struct ConvergenceReport {
    std::string experiment;
    ExperimentConfig config;
    std::vector<Series> series;
};

// Per-n distribution of sup over the evaluation set of |LD_n - LD|. The
// population depth comes from the sampler's closed form when available,
// otherwise from Monte Carlo with oracle_pairs draws per point.
ConvergenceReport supnorm_experiment(const ExperimentConfig& cfg);

// Per-n Hausdorff distance between {LD_n >= lambda} and {LD >= lambda} on
// the lattice, and between their inner boundaries. On the real line the
// true set is read from the sampler's quantiles.
ConvergenceReport levelset_experiment(const ExperimentConfig& cfg);

// Joint estimates from shared pair draws: p2(i, j) = P2(f_i f_j), with the
// diagonal holding P2(f_i) exactly. `target` is 4 (P2(f_i f_j) - P2(f_i)
// P2(f_j)) and `target_se` its Monte Carlo standard error.
struct P2Matrix {
    std::vector<std::vector<double>> p2;
    std::vector<std::vector<double>> target;
    std::vector<std::vector<double>> target_se;
    std::uint64_t pairs = 0;
};

P2Matrix p2_matrix(std::span<const Point> points, const Sampler& sampler, std::uint64_t pairs, std::uint64_t seed);

struct P2Estimate {
    double p1 = 0.0;   // P2(f_{x1})
    double p2 = 0.0;   // P2(f_{x2})
    double p12 = 0.0;  // P2(f_{x1} f_{x2})
};

P2Estimate p2_functional(const Point& x1, const Point& x2, const Sampler& sampler, std::uint64_t pairs,
                         std::uint64_t seed);

// 4 Cov(f_i(X1, X2), f_j(X1, X3)): the variance of the first-order
// projection of the U-statistic, from `triples` shared draws.
std::vector<std::vector<double>> projection_covariance(std::span<const Point> points, const Sampler& sampler,
                                                       std::uint64_t triples, std::uint64_t seed);

struct CltResult {
    std::size_t n = 0;
    std::size_t replications = 0;
    std::vector<double> population_depth;
    // Covariance of sqrt(n) (LD_n(x_i) - LD(x_i)) over replications.
    std::vector<std::vector<double>> empirical;
    std::vector<std::vector<double>> empirical_se;
    P2Matrix oracle;
    std::vector<std::vector<double>> projection;
};

struct CltReport {
    ExperimentConfig config;
    std::vector<Point> queries;
    std::vector<CltResult> per_n;
};

// Requires replications >= 500 and at least one query point.
CltReport clt_experiment(const ExperimentConfig& cfg);

nlohmann::json to_json(const ConvergenceReport& r);
nlohmann::json to_json(const CltReport& r);

// Dispatches on cfg.experiment.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

}  // namespace lensdepth
