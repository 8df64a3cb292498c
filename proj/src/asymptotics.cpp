#include "lensdepth/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lensdepth/depth.hpp"
#include "lensdepth/error.hpp"
#include "lensdepth/levelsets.hpp"
#include "lensdepth/parallel.hpp"
#include "lensdepth/stats.hpp"

namespace lensdepth {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (experiment != "supnorm" && experiment != "levelset" && experiment != "clt")
        throw DomainError("experiment must be 'supnorm', 'levelset' or 'clt'");
    if (n_schedule.empty()) throw DomainError("experiment: empty n schedule");
    for (std::size_t k = 0; k < n_schedule.size(); ++k) {
        if (n_schedule[k] < 2) throw DomainError("experiment: every n must be at least 2");
        if (k && n_schedule[k] <= n_schedule[k - 1]) throw DomainError("experiment: n schedule must be strictly increasing");
    }
    if (replications < 1) throw DomainError("experiment: replications must be at least 1");
    if (!(lambda >= 0.0)) throw DomainError("experiment: lambda must be >= 0");
    if (grid.empty() && queries.empty()) throw DomainError("experiment: need a grid or query points");
}

json ExperimentConfig::to_json() const {
    return {{"experiment", experiment}, {"sampler", sampler},  {"n", n_schedule},
            {"replications", replications}, {"seed", seed}, {"grid", grid},
            {"lambda", lambda}, {"queries", queries}, {"oracle_pairs", oracle_pairs}};
}

ExperimentConfig parse_experiment_config(const json& j) {
    if (!j.is_object()) throw DomainError("experiment config must be a JSON object");
    static const char* known[] = {"experiment", "sampler", "n", "replications", "seed",
                                  "grid", "lambda", "queries", "oracle_pairs"};
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
            throw DomainError("experiment config: unknown key '" + key + "'");
    }
    ExperimentConfig cfg;
    try {
        if (j.contains("experiment")) cfg.experiment = j.at("experiment").get<std::string>();
        if (j.contains("sampler")) cfg.sampler = j.at("sampler");
        if (j.contains("n")) cfg.n_schedule = j.at("n").get<std::vector<std::size_t>>();
        if (j.contains("replications")) cfg.replications = j.at("replications").get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("grid")) cfg.grid = j.at("grid").get<std::string>();
        if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
        if (j.contains("queries")) {
            for (const auto& q : j.at("queries"))
                cfg.queries.push_back(q.is_array() ? q.get<std::vector<double>>() : std::vector<double>{q.get<double>()});
            if (!j.contains("grid")) cfg.grid.clear();
        }
        if (j.contains("oracle_pairs")) cfg.oracle_pairs = j.at("oracle_pairs").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw DomainError(std::string("experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

namespace {

Point query_point(const std::vector<double>& coords, const MetricSpace& space) {
    switch (space.kind) {
        case MetricKind::euclidean:
            if (coords.size() != space.dim) throw MismatchError("query point has the wrong dimension");
            return RealVector{coords};
        case MetricKind::sphere:
            if (coords.size() != space.dim) throw MismatchError("query point has the wrong dimension");
            return make_unit_vector(coords);
        case MetricKind::stiefel_chordal:
        case MetricKind::stiefel_procrustes:
            return make_frame(space.dim, space.cols, coords);
        case MetricKind::bhv:
            break;
    }
    throw DomainError("experiment: query points are not supported for tree samplers");
}

std::vector<Point> query_points(const ExperimentConfig& cfg, const MetricSpace& space) {
    std::vector<Point> out;
    for (const auto& q : cfg.queries) out.push_back(query_point(q, space));
    return out;
}

EvaluationGrid evaluation_set(const ExperimentConfig& cfg, const MetricSpace& space) {
    if (cfg.grid.empty()) return EvaluationGrid::scattered(query_points(cfg, space), space);
    auto axes = parse_grid_spec(cfg.grid);
    if (space.kind != MetricKind::euclidean || space.dim != axes.size())
        throw MismatchError("experiment: grid dimension does not match the sampler space " + space.describe());
    return EvaluationGrid::lattice(std::move(axes));
}

std::vector<double> population_depths(const std::vector<Point>& points, const Sampler& sampler,
                                      const ExperimentConfig& cfg) {
    std::vector<double> out(points.size());
    std::vector<char> missing(points.size(), 0);
    for (std::size_t g = 0; g < points.size(); ++g) {
        const auto v = sampler.population_depth(points[g]);
        if (v)
            out[g] = *v;
        else
            missing[g] = 1;
    }
    if (std::find(missing.begin(), missing.end(), 1) == missing.end()) return out;
    if (cfg.oracle_pairs == 0) throw DomainError("experiment: no closed-form population depth and oracle_pairs is 0");
    const PointGenerator gen = sampler.generator();
    for (std::size_t g = 0; g < points.size(); ++g)
        if (missing[g])
            out[g] = population_ld_mc(points[g], gen, sampler.space(), cfg.oracle_pairs, substream_seed(cfg.seed, {0xd0, g}));
    return out;
}

std::vector<Point> draw_sample(const Sampler& sampler, std::size_t n, Rng& rng) {
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(sampler.draw(rng));
    return pts;
}

// Fills a report series from per-(n, replication) values.
Series summarize(std::string name, const std::vector<std::size_t>& ns, std::vector<std::vector<double>> values) {
    Series s;
    s.name = std::move(name);
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const auto& v = values[k];
        SeriesStats st;
        st.n = ns[k];
        st.replications = v.size();
        st.median = stats::quantile(v, 0.5);
        st.q1 = stats::quantile(v, 0.25);
        st.q3 = stats::quantile(v, 0.75);
        st.mean = stats::mean(v);
        st.min = *std::min_element(v.begin(), v.end());
        st.max = *std::max_element(v.begin(), v.end());
        s.per_n.push_back(st);
    }
    for (std::size_t k = 0; k + 1 < s.per_n.size(); ++k) {
        const double a = s.per_n[k].median, b = s.per_n[k + 1].median;
        s.nonincreasing = s.nonincreasing && b <= a;
        s.strictly_decreasing = s.strictly_decreasing && b < a;
        s.ratios.push_back(b > 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN());
    }
    s.values = std::move(values);
    return s;
}

// Runs body(k, r, rng) for every schedule index k and replication r, each
// with its own substream, and collects the returned values.
template <class Body>
std::vector<std::vector<double>> replicate(const ExperimentConfig& cfg, std::uint64_t tag, Body&& body) {
    const std::size_t K = cfg.n_schedule.size(), R = cfg.replications;
    std::vector<double> flat(K * R);
    parallel_for(K * R, [&](std::size_t t) {
        const std::size_t k = t / R, r = t % R;
        Rng rng = substream(cfg.seed, {tag, k, r});
        flat[t] = body(k, rng);
    });
    std::vector<std::vector<double>> out(K);
    for (std::size_t k = 0; k < K; ++k) out[k].assign(flat.begin() + static_cast<std::ptrdiff_t>(k * R),
                                                      flat.begin() + static_cast<std::ptrdiff_t>((k + 1) * R));
    return out;
}

std::vector<std::vector<double>> square(std::size_t k, double v = 0.0) {
    return std::vector<std::vector<double>>(k, std::vector<double>(k, v));
}

}  // namespace

ConvergenceReport supnorm_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto sampler = make_sampler(cfg.sampler);
    const EvaluationGrid grid = evaluation_set(cfg, sampler->space());
    const std::vector<double> truth = population_depths(grid.points(), *sampler, cfg);
    auto values = replicate(cfg, 0x5a, [&](std::size_t k, Rng& rng) {
        const Sample sample(draw_sample(*sampler, cfg.n_schedule[k], rng), sampler->space());
        const auto est = batch_depth_values(grid.points(), sample);
        double sup = 0.0;
        for (std::size_t g = 0; g < est.size(); ++g) sup = std::max(sup, std::abs(est[g] - truth[g]));
        return sup;
    });
    ConvergenceReport rep{"supnorm", cfg, {}};
    rep.series.push_back(summarize("sup_error", cfg.n_schedule, std::move(values)));
    return rep;
}

ConvergenceReport levelset_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.grid.empty()) throw DomainError("levelset experiment: needs a lattice grid");
    const auto sampler = make_sampler(cfg.sampler);
    const EvaluationGrid grid = evaluation_set(cfg, sampler->space());
    const auto& pts = grid.points();

    DepthField truth;
    truth.points = pts;
    truth.space = grid.space();
    truth.values.assign(pts.size(), 0.0);
    const bool line = grid.space().dim == 1 && sampler->quantile(0.5).has_value();
    if (line) {
        if (cfg.lambda > 0.5) throw DomainError("levelset experiment: lambda exceeds the maximal population depth 1/2");
        double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
        if (cfg.lambda > 0.0) {
            const double tail = cfg.lambda / (1.0 + std::sqrt(1.0 - 2.0 * cfg.lambda));
            lo = *sampler->quantile(tail);
            hi = *sampler->quantile(1.0 - tail);
        }
        for (std::size_t g = 0; g < pts.size(); ++g) {
            const double x = std::get<RealVector>(pts[g]).coords[0];
            truth.values[g] = x >= lo && x <= hi ? 1.0 : 0.0;
        }
    } else {
        const auto depth = population_depths(pts, *sampler, cfg);
        for (std::size_t g = 0; g < pts.size(); ++g) truth.values[g] = depth[g] >= cfg.lambda ? 1.0 : 0.0;
    }
    const LevelSet true_set = level_set(truth, 0.5);
    if (true_set.members.empty())
        throw DomainError("levelset experiment: lambda is above the population depth everywhere on the grid");
    const std::vector<Point> true_pts = gather(pts, true_set.members);
    const std::vector<Point> true_boundary = gather(pts, boundary_points(true_set, grid));

    const std::size_t K = cfg.n_schedule.size(), R = cfg.replications;
    std::vector<double> sets(K * R), bounds(K * R);
    parallel_for(K * R, [&](std::size_t t) {
        const std::size_t k = t / R, r = t % R;
        Rng rng = substream(cfg.seed, {0x15, k, r});
        const Sample sample(draw_sample(*sampler, cfg.n_schedule[k], rng), sampler->space());
        DepthField field;
        field.points = pts;
        field.values = batch_depth_values(pts, sample);
        field.sample_size = sample.size();
        field.space = grid.space();
        const LevelSet est = level_set(field, cfg.lambda);
        if (est.members.empty()) {
            sets[t] = bounds[t] = std::numeric_limits<double>::infinity();
            return;
        }
        sets[t] = hausdorff(gather(pts, est.members), true_pts, grid.space());
        const auto b = boundary_points(est, grid);
        bounds[t] = b.empty() || true_boundary.empty() ? std::numeric_limits<double>::infinity()
                                                       : hausdorff(gather(pts, b), true_boundary, grid.space());
    });
    auto split = [&](const std::vector<double>& flat) {
        std::vector<std::vector<double>> out(K);
        for (std::size_t k = 0; k < K; ++k)
            out[k].assign(flat.begin() + static_cast<std::ptrdiff_t>(k * R), flat.begin() + static_cast<std::ptrdiff_t>((k + 1) * R));
        return out;
    };
    ConvergenceReport rep{"levelset", cfg, {}};
    rep.series.push_back(summarize("hausdorff_set", cfg.n_schedule, split(sets)));
    rep.series.push_back(summarize("hausdorff_boundary", cfg.n_schedule, split(bounds)));
    return rep;
}

P2Matrix p2_matrix(std::span<const Point> points, const Sampler& sampler, std::uint64_t pairs, std::uint64_t seed) {
    if (pairs == 0) throw DomainError("p2: pairs must be at least 1");
    if (points.empty()) throw DomainError("p2: no points");
    for (const Point& p : points) check_member(p, sampler.space());
    const std::size_t k = points.size();
    constexpr std::uint64_t kBlock = 4096;
    const std::uint64_t blocks = (pairs + kBlock - 1) / kBlock;
    // Integer co-occurrence counts per block keep the sums exact.
    std::vector<std::vector<std::uint64_t>> counts(blocks, std::vector<std::uint64_t>(k * k, 0));
    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = substream(seed, {0x92, b});
        const std::uint64_t todo = std::min(kBlock, pairs - b * kBlock);
        std::vector<char> hit(k);
        auto& c = counts[b];
        for (std::uint64_t t = 0; t < todo; ++t) {
            const Point y1 = sampler.draw(rng);
            const Point y2 = sampler.draw(rng);
            for (std::size_t i = 0; i < k; ++i) hit[i] = in_lens(points[i], y1, y2, sampler.space());
            for (std::size_t i = 0; i < k; ++i)
                if (hit[i])
                    for (std::size_t j = 0; j < k; ++j) c[i * k + j] += hit[j];
        }
    });
    std::vector<std::uint64_t> total(k * k, 0);
    for (const auto& c : counts)
        for (std::size_t e = 0; e < k * k; ++e) total[e] += c[e];

    P2Matrix m;
    m.pairs = pairs;
    m.p2 = square(k);
    m.target = square(k);
    m.target_se = square(k);
    const double N = static_cast<double>(pairs);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m.p2[i][j] = static_cast<double>(total[i * k + j]) / N;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double pi = m.p2[i][i], pj = m.p2[j][j], pij = m.p2[i][j];
            const double cov = pij - pi * pj;
            m.target[i][j] = 4.0 * cov;
            // E[((I_i - p_i)(I_j - p_j))^2] expanded with I^2 = I.
            const double ai = 1.0 - 2.0 * pi, aj = 1.0 - 2.0 * pj;
            const double second = pij * ai * aj + pi * ai * pj * pj + pj * aj * pi * pi + pi * pi * pj * pj;
            m.target_se[i][j] = 4.0 * std::sqrt(std::max(0.0, second - cov * cov) / N);
        }
    }
    return m;
}

P2Estimate p2_functional(const Point& x1, const Point& x2, const Sampler& sampler, std::uint64_t pairs,
                         std::uint64_t seed) {
    const Point pts[2] = {x1, x2};
    const P2Matrix m = p2_matrix(pts, sampler, pairs, seed);
    return {m.p2[0][0], m.p2[1][1], m.p2[0][1]};
}

std::vector<std::vector<double>> projection_covariance(std::span<const Point> points, const Sampler& sampler,
                                                       std::uint64_t triples, std::uint64_t seed) {
    if (triples == 0) throw DomainError("projection_covariance: triples must be at least 1");
    const std::size_t k = points.size();
    constexpr std::uint64_t kBlock = 4096;
    const std::uint64_t blocks = (triples + kBlock - 1) / kBlock;
    std::vector<std::vector<std::uint64_t>> cross(blocks, std::vector<std::uint64_t>(k * k, 0));
    std::vector<std::vector<std::uint64_t>> first(blocks, std::vector<std::uint64_t>(k, 0));
    std::vector<std::vector<std::uint64_t>> second(blocks, std::vector<std::uint64_t>(k, 0));
    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = substream(seed, {0x93, b});
        const std::uint64_t todo = std::min(kBlock, triples - b * kBlock);
        std::vector<char> h12(k), h13(k);
        for (std::uint64_t t = 0; t < todo; ++t) {
            const Point y1 = sampler.draw(rng);
            const Point y2 = sampler.draw(rng);
            const Point y3 = sampler.draw(rng);
            for (std::size_t i = 0; i < k; ++i) {
                h12[i] = in_lens(points[i], y1, y2, sampler.space());
                h13[i] = in_lens(points[i], y1, y3, sampler.space());
                first[b][i] += h12[i];
                second[b][i] += h13[i];
            }
            for (std::size_t i = 0; i < k; ++i)
                if (h12[i])
                    for (std::size_t j = 0; j < k; ++j) cross[b][i * k + j] += h13[j];
        }
    });
    std::vector<double> c(k * k, 0.0), a(k, 0.0), s(k, 0.0);
    for (std::uint64_t b = 0; b < blocks; ++b) {
        for (std::size_t e = 0; e < k * k; ++e) c[e] += static_cast<double>(cross[b][e]);
        for (std::size_t i = 0; i < k; ++i) {
            a[i] += static_cast<double>(first[b][i]);
            s[i] += static_cast<double>(second[b][i]);
        }
    }
    const double N = static_cast<double>(triples);
    auto out = square(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double cij = c[i * k + j] / N - (a[i] / N) * (s[j] / N);
            const double cji = c[j * k + i] / N - (a[j] / N) * (s[i] / N);
            out[i][j] = 4.0 * 0.5 * (cij + cji);
        }
    return out;
}

CltReport clt_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.replications < 500) throw DomainError("clt experiment: needs at least 500 replications");
    if (cfg.queries.empty()) throw DomainError("clt experiment: needs query points");
    if (cfg.oracle_pairs == 0) throw DomainError("clt experiment: oracle_pairs must be positive");
    const auto sampler = make_sampler(cfg.sampler);
    CltReport rep;
    rep.config = cfg;
    rep.queries = query_points(cfg, sampler->space());
    const std::size_t k = rep.queries.size(), R = cfg.replications;

    const P2Matrix oracle = p2_matrix(rep.queries, *sampler, cfg.oracle_pairs, substream_seed(cfg.seed, {0xc2}));
    const auto projection = projection_covariance(rep.queries, *sampler, cfg.oracle_pairs, substream_seed(cfg.seed, {0xc3}));
    std::vector<double> ld(k);
    for (std::size_t i = 0; i < k; ++i) ld[i] = sampler->population_depth(rep.queries[i]).value_or(oracle.p2[i][i]);

    for (std::size_t nk = 0; nk < cfg.n_schedule.size(); ++nk) {
        const std::size_t n = cfg.n_schedule[nk];
        const double root_n = std::sqrt(static_cast<double>(n));
        std::vector<std::vector<double>> z(R);
        parallel_for(R, [&](std::size_t r) {
            Rng rng = substream(cfg.seed, {0xc1, nk, r});
            const Sample sample(draw_sample(*sampler, n, rng), sampler->space());
            const auto est = batch_depth_values(rep.queries, sample);
            z[r].resize(k);
            for (std::size_t i = 0; i < k; ++i) z[r][i] = root_n * (est[i] - ld[i]);
        });
        CltResult res;
        res.n = n;
        res.replications = R;
        res.population_depth = ld;
        res.empirical = square(k);
        res.empirical_se = square(k);
        res.oracle = oracle;
        res.projection = projection;
        std::vector<double> mean(k, 0.0);
        for (const auto& row : z)
            for (std::size_t i = 0; i < k; ++i) mean[i] += row[i];
        for (double& m : mean) m /= static_cast<double>(R);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i; j < k; ++j) {
                std::vector<double> prod(R);
                for (std::size_t r = 0; r < R; ++r) prod[r] = (z[r][i] - mean[i]) * (z[r][j] - mean[j]);
                double sum = 0.0;
                for (double p : prod) sum += p;
                const double cov = sum / static_cast<double>(R - 1);
                const double se = std::sqrt(stats::variance(prod) / static_cast<double>(R));
                res.empirical[i][j] = res.empirical[j][i] = cov;
                res.empirical_se[i][j] = res.empirical_se[j][i] = se;
            }
        rep.per_n.push_back(std::move(res));
    }
    return rep;
}

json to_json(const ConvergenceReport& r) {
    json series = json::array();
    for (const Series& s : r.series) {
        json rows = json::array();
        for (const SeriesStats& st : s.per_n)
            rows.push_back({{"n", st.n}, {"replications", st.replications}, {"median", st.median}, {"q1", st.q1},
                            {"q3", st.q3}, {"mean", st.mean}, {"min", st.min}, {"max", st.max}});
        series.push_back({{"name", s.name},
                          {"per_n", rows},
                          {"median_nonincreasing", s.nonincreasing},
                          {"median_strictly_decreasing", s.strictly_decreasing},
                          {"median_ratios", s.ratios},
                          {"rate_note", "ratios compared with sqrt(n_next / n) follow the n^-1/2 U-statistic heuristic"}});
    }
    return {{"experiment", r.experiment}, {"config", r.config.to_json()}, {"series", series}};
}

json to_json(const CltReport& r) {
    json rows = json::array();
    for (const CltResult& c : r.per_n)
        rows.push_back({{"n", c.n},
                        {"replications", c.replications},
                        {"population_depth", c.population_depth},
                        {"empirical_covariance", c.empirical},
                        {"empirical_se", c.empirical_se},
                        {"target_covariance", c.oracle.target},
                        {"target_se", c.oracle.target_se},
                        {"p2", c.oracle.p2},
                        {"oracle_pairs", c.oracle.pairs},
                        {"projection_covariance", c.projection}});
    return {{"experiment", "clt"}, {"config", r.config.to_json()}, {"results", rows}};
}

json run_experiment(const ExperimentConfig& cfg) {
    if (cfg.experiment == "supnorm") return to_json(supnorm_experiment(cfg));
    if (cfg.experiment == "levelset") return to_json(levelset_experiment(cfg));
    if (cfg.experiment == "clt") return to_json(clt_experiment(cfg));
    throw DomainError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace lensdepth
