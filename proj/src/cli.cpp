#include "lensdepth/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lensdepth/analysis.hpp"
#include "lensdepth/asymptotics.hpp"
#include "lensdepth/depth.hpp"
#include "lensdepth/dispersion.hpp"
#include "lensdepth/error.hpp"
#include "lensdepth/io.hpp"
#include "lensdepth/levelsets.hpp"
#include "lensdepth/parallel.hpp"
#include "lensdepth/svg.hpp"

namespace lensdepth::cli {

namespace fs = std::filesystem;
using io::Cell;
using io::Table;

namespace {

// Bad flag values found after parsing; reported like parse errors.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
    std::string format = "csv";
    bool no_timestamp = false;
    std::string metric = "euclidean";
    std::string shape;
    std::string svg;
    bool seed_given = false;
};

// Evaluation geometry shared by the level-set style commands.
struct GridOptions {
    std::string grid;
    bool wrap = false;
    std::size_t knn = 8;
};

struct Options {
    // depth / levelset / psi / outliers
    std::string sample, queries;
    bool leave_one_out = false;
    double lambda = 0.0;
    std::string boundary, psi_out;
    std::string psi = "diam";
    std::string psi_sweep;
    std::size_t lambdas = 200;
    double lambda_max = 0.0;
    GridOptions grid;
    // gamma / order
    std::string x, y;
    double s = 0.0;
    std::size_t refine = 0;
    std::string relation = "all";
    // ddplot
    std::string group0, group1;
    // outliers
    bool deepest = false;
    // diam-by-group
    std::string groups;
    // treedist
    std::string in;
    // gamma-tn
    std::string v = "1..5", sigma = "0:5:0.05", method = "quadrature";
    std::size_t nodes = 100000;
    // simulate
    std::string config;
};

class Runner {
public:
    Runner(const Globals& g, const Options& o, std::ostream& out) : g_(g), o_(o), out_(out) {}

    io::Provenance prov;

    void depth();
    void levelset();
    void psi();
    void gamma();
    void order();
    void ddplot();
    void outliers();
    void diam_by_group();
    void treedist();
    void gamma_tn();
    void simulate();

private:
    MetricKind metric() const { return parse_metric_kind(g_.metric); }
    std::optional<io::Shape> shape() const {
        if (g_.shape.empty()) return std::nullopt;
        return io::parse_shape(g_.shape);
    }
    io::LoadedPoints load(const std::string& path, const io::LoadedPoints* universe_from = nullptr) const;
    Sample sample_of(const io::LoadedPoints& pts) const { return Sample(pts.points, pts.space); }
    EvaluationGrid grid_or_points(const std::vector<Point>& points, const MetricSpace& space) const;
    DepthField field_on(const EvaluationGrid& grid, const Sample& sample, bool self) const;
    std::vector<double> lambda_values(double s) const;

    void emit(const Table& t) const { write(g_.out, io::render(t, prov, g_.format)); }
    void emit_to(const std::string& path, const Table& t) const { write(path, io::render(t, prov, g_.format)); }
    void write(const std::string& path, const std::string& text) const {
        if (path.empty() || path == "-")
            out_ << text;
        else
            io::atomic_write(path, text);
    }
    void write_svg(const std::string& text) const {
        if (!g_.svg.empty()) io::atomic_write(g_.svg, text);
    }
    std::string sibling(const std::string& suffix) const {
        if (g_.out.empty() || g_.out == "-") return {};
        fs::path p(g_.out);
        return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
    }

    const Globals& g_;
    const Options& o_;
    std::ostream& out_;
};

io::LoadedPoints Runner::load(const std::string& path, const io::LoadedPoints* universe_from) const {
    if (metric() == MetricKind::bhv && universe_from && !universe_from->points.empty()) {
        const auto& leaves = std::get<TreePoint>(universe_from->points.front()).tree->leaves();
        return io::read_points(path, metric(), shape(), std::span<const std::string>(leaves));
    }
    io::LoadedPoints pts = io::read_points(path, metric(), shape());
    if (universe_from && !(pts.space == universe_from->space))
        throw MismatchError(path + ": points live in " + pts.space.describe() + " but " +
                            universe_from->space.describe() + " was expected");
    return pts;
}

EvaluationGrid Runner::grid_or_points(const std::vector<Point>& points, const MetricSpace& space) const {
    if (o_.grid.grid.empty()) return EvaluationGrid::knn(points, space, o_.grid.knn);
    auto axes = parse_grid_spec(o_.grid.grid);
    if (space.kind != MetricKind::euclidean || space.dim != axes.size())
        throw UsageError("--grid has " + std::to_string(axes.size()) + " axes but the data live in " + space.describe());
    return EvaluationGrid::lattice(std::move(axes), o_.grid.wrap);
}

DepthField Runner::field_on(const EvaluationGrid& grid, const Sample& sample, bool self) const {
    if (self && o_.leave_one_out) return self_depth(sample);
    return batch_depth(grid.points(), sample);
}

std::vector<double> Runner::lambda_values(double s) const {
    if (!(s > 0.0)) throw DomainError("depth is 0 on the whole evaluation set; no lambda range to sweep");
    return lambda_grid(s, o_.lambdas);
}

Table psi_table(const PsiCurve& c) {
    Table t{{"lambda", "psi"}, {}};
    for (std::size_t i = 0; i < c.lambdas.size(); ++i) t.rows.push_back({c.lambdas[i], c.values[i]});
    return t;
}

double max_value(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

void add_coords(std::vector<Cell>& row, const Point& p) {
    if (const auto* r = std::get_if<RealVector>(&p))
        for (double c : r->coords) row.push_back(c);
}

std::vector<std::string> coord_columns(const MetricSpace& space) {
    std::vector<std::string> cols;
    if (space.kind == MetricKind::euclidean)
        for (std::size_t k = 1; k <= space.dim; ++k) cols.push_back("x" + std::to_string(k));
    return cols;
}

void Runner::depth() {
    if (o_.leave_one_out && !o_.queries.empty()) throw UsageError("--leave-one-out applies only without --queries");
    const auto pts = load(o_.sample);
    const Sample sample = sample_of(pts);
    std::vector<double> values;
    if (o_.queries.empty()) {
        values = o_.leave_one_out ? leave_one_out_depth(sample) : batch_depth_values(sample.points(), sample);
    } else {
        const auto q = load(o_.queries, &pts);
        values = batch_depth_values(q.points, sample);
    }
    Table t{{"index", "depth"}, {}};
    for (std::size_t i = 0; i < values.size(); ++i) t.rows.push_back({static_cast<std::int64_t>(i), values[i]});
    emit(t);
}

void Runner::levelset() {
    const auto pts = load(o_.sample);
    const Sample sample = sample_of(pts);
    const EvaluationGrid grid = grid_or_points(sample.points(), sample.space());
    const DepthField field = field_on(grid, sample, o_.grid.grid.empty());
    const LevelSet ls = level_set(field, o_.lambda);
    const auto in = ls.membership();

    Table members{{"index"}, {}};
    for (auto& c : coord_columns(grid.space())) members.columns.push_back(c);
    members.columns.insert(members.columns.end(), {"depth", "member"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<Cell> row{static_cast<std::int64_t>(i)};
        add_coords(row, grid.points()[i]);
        row.push_back(field.values[i]);
        row.push_back(static_cast<std::int64_t>(in[i]));
        members.rows.push_back(std::move(row));
    }
    Table boundary{{"index"}, {}};
    for (auto& c : coord_columns(grid.space())) boundary.columns.push_back(c);
    for (std::size_t i : boundary_points(ls, grid)) {
        std::vector<Cell> row{static_cast<std::int64_t>(i)};
        add_coords(row, grid.points()[i]);
        boundary.rows.push_back(std::move(row));
    }
    std::optional<Table> sweep;
    if (!o_.psi_sweep.empty()) {
        const auto lambdas = lambda_values(max_value(field.values));
        sweep = psi_table(psi_curve(field, grid, parse_psi_kind(o_.psi_sweep), lambdas));
    }
    emit(members);
    const std::string bpath = o_.boundary.empty() ? sibling("_boundary") : o_.boundary;
    if (!bpath.empty()) emit_to(bpath, boundary);
    if (sweep) emit_to(o_.psi_out.empty() ? sibling("_psi") : o_.psi_out, *sweep);
}

void Runner::psi() {
    const auto pts = load(o_.sample);
    const Sample sample = sample_of(pts);
    const EvaluationGrid grid = grid_or_points(sample.points(), sample.space());
    const DepthField field = field_on(grid, sample, o_.grid.grid.empty());
    const auto lambdas = lambda_values(o_.lambda_max > 0.0 ? o_.lambda_max : max_value(field.values));
    const PsiCurve c = psi_curve(field, grid, parse_psi_kind(o_.psi), lambdas);
    emit(psi_table(c));
    write_svg(svg::lines({{std::string(to_string(c.kind)), c.lambdas, c.values}},
                         {"psi of depth level sets", "lambda", std::string(to_string(c.kind))}));
}

void Runner::gamma() {
    const auto px = load(o_.x);
    const auto py = load(o_.y, &px);
    const Sample sx = sample_of(px), sy = sample_of(py);
    std::vector<Point> pooled = sx.points();
    pooled.insert(pooled.end(), sy.points().begin(), sy.points().end());
    const EvaluationGrid grid = o_.grid.grid.empty() ? EvaluationGrid::scattered(pooled, sx.space())
                                                     : grid_or_points(pooled, sx.space());
    const DepthField fx = batch_depth(grid.points(), sx), fy = batch_depth(grid.points(), sy);
    const double s = o_.s > 0.0 ? o_.s : depth_sup(fx, fy);
    const PsiKind kind = parse_psi_kind(o_.psi);
    auto lambdas = lambda_values(s);
    PsiCurve cx = psi_curve(fx, grid, kind, lambdas), cy = psi_curve(fy, grid, kind, lambdas);
    if (o_.refine > 1) {
        lambdas = refine_near_crossings(cx, cy, o_.refine);
        cx = psi_curve(fx, grid, kind, lambdas);
        cy = psi_curve(fy, grid, kind, lambdas);
    }
    const double g = lensdepth::gamma(cx, cy, s);
    const auto strong = strong_order(cx, cy, mc_tolerance(cx, cy, 1));
    const auto weak = weak_order(cx, cy, s * mc_tolerance(cx, cy, 1));
    const auto spread = spread_out_ge(cx, cy, mc_tolerance(cx, cy, 2));
    Table t{{"gamma", "s", "psi", "lambda_count", "strong", "weak", "spread_out", "region"}, {}};
    t.rows.push_back({g, s, std::string(to_string(kind)), static_cast<std::int64_t>(lambdas.size()),
                      static_cast<std::int64_t>(strong.holds), static_cast<std::int64_t>(weak.holds),
                      static_cast<std::int64_t>(spread.holds), cx.region});
    emit(t);
    write_svg(svg::lines({{"X", cx.lambdas, cx.values}, {"Y", cy.lambdas, cy.values}},
                         {"psi curves", "lambda", std::string(to_string(kind))}));
}

void Runner::order() {
    static const std::vector<std::string> relations{"spread-out", "strong", "weak", "giovagnoli"};
    if (o_.relation != "all" && std::find(relations.begin(), relations.end(), o_.relation) == relations.end())
        throw UsageError("--relation must be one of spread-out, strong, weak, giovagnoli, all");
    const auto px = load(o_.x);
    const auto py = load(o_.y, &px);
    const Sample sx = sample_of(px), sy = sample_of(py);
    std::vector<OrderVerdict> verdicts;
    const bool want_curves = o_.relation != "giovagnoli";
    if (want_curves) {
        std::vector<Point> pooled = sx.points();
        pooled.insert(pooled.end(), sy.points().begin(), sy.points().end());
        const EvaluationGrid grid = o_.grid.grid.empty() ? EvaluationGrid::scattered(pooled, sx.space())
                                                         : grid_or_points(pooled, sx.space());
        const DepthField fx = batch_depth(grid.points(), sx), fy = batch_depth(grid.points(), sy);
        const double s = o_.s > 0.0 ? o_.s : depth_sup(fx, fy);
        const PsiKind kind = parse_psi_kind(o_.psi);
        const auto lambdas = lambda_values(s);
        const PsiCurve cx = psi_curve(fx, grid, kind, lambdas), cy = psi_curve(fy, grid, kind, lambdas);
        if (o_.relation == "all" || o_.relation == "spread-out")
            verdicts.push_back(spread_out_ge(cx, cy, mc_tolerance(cx, cy, 2)));
        if (o_.relation == "all" || o_.relation == "strong")
            verdicts.push_back(strong_order(cx, cy, mc_tolerance(cx, cy, 1)));
        if (o_.relation == "all" || o_.relation == "weak")
            verdicts.push_back(weak_order(cx, cy, s * mc_tolerance(cx, cy, 1)));
    }
    if (o_.relation == "all" || o_.relation == "giovagnoli") verdicts.push_back(giovagnoli_order(sx, sy));
    Table t{{"relation", "holds", "witness", "witness_upper", "margin", "region"}, {}};
    auto opt = [](const std::optional<double>& v) -> Cell { return v ? Cell(*v) : Cell(std::string()); };
    for (const auto& v : verdicts)
        t.rows.push_back({std::string(to_string(v.kind)), static_cast<std::int64_t>(v.holds), opt(v.witness),
                          opt(v.witness_upper), v.margin, v.region});
    emit(t);
}

void Runner::ddplot() {
    const auto p0 = load(o_.group0);
    const auto p1 = load(o_.group1, &p0);
    const Sample s0 = sample_of(p0), s1 = sample_of(p1);
    std::vector<DepthDepthRecord> records;
    if (o_.queries.empty()) {
        records = depth_depth_of_groups(s0, s1);
    } else {
        const auto q = load(o_.queries, &p0);
        records = depth_depth(s0, s1, q.points);
    }
    Table t{{"index", "group", "depth0", "depth1"}, {}};
    std::vector<svg::ScatterPoint> dots;
    for (const auto& r : records) {
        t.rows.push_back({static_cast<std::int64_t>(r.index), static_cast<std::int64_t>(r.group), r.depth0, r.depth1});
        dots.push_back({r.depth0, r.depth1, r.group < 0 ? 0 : r.group});
    }
    emit(t);
    write_svg(svg::scatter(dots, {"depth-depth plot", "depth w.r.t. group 0", "depth w.r.t. group 1"}, true));
}

void Runner::outliers() {
    const auto pts = load(o_.sample);
    const DepthField field = self_depth(sample_of(pts));
    if (o_.deepest) {
        const auto [a, b] = deepest_pair(field);
        Table t{{"rank", "index", "depth"}, {}};
        t.rows.push_back({std::int64_t{1}, static_cast<std::int64_t>(a), field.values[a]});
        t.rows.push_back({std::int64_t{2}, static_cast<std::int64_t>(b), field.values[b]});
        emit(t);
        return;
    }
    Table t{{"index", "depth"}, {}};
    for (std::size_t i : lensdepth::outliers(field, o_.lambda))
        t.rows.push_back({static_cast<std::int64_t>(i), field.values[i]});
    emit(t);
}

void Runner::diam_by_group() {
    const bool trees = metric() == MetricKind::bhv;
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(o_.groups, ec)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        const bool ok = trees ? (ext == ".nwk" || ext == ".newick" || ext == ".tre" || ext == ".tree") : ext == ".csv";
        if (ok) files.push_back(entry.path());
    }
    if (ec) throw Error("cannot read directory " + o_.groups);
    if (files.empty()) throw Error("no group files in " + o_.groups);
    std::sort(files.begin(), files.end());
    std::map<std::string, Sample> groups;
    std::optional<io::LoadedPoints> first;
    for (const auto& f : files) {
        auto pts = load(f.string(), first ? &*first : nullptr);
        if (!first) first = pts;
        groups.emplace(f.stem().string(), sample_of(pts));
    }
    double s = o_.lambda_max;
    if (!(s > 0.0))
        for (const auto& [label, sample] : groups) s = std::max(s, max_value(leave_one_out_depth(sample)));
    const auto lambdas = lambda_values(s);
    const auto curves = diameter_curve_by_group(groups, lambdas);
    Table t{{"group", "lambda", "diameter"}, {}};
    std::vector<svg::LineSeries> series;
    for (const auto& [label, c] : curves) {
        for (std::size_t i = 0; i < c.lambdas.size(); ++i) t.rows.push_back({label, c.lambdas[i], c.values[i]});
        series.push_back({label, c.lambdas, c.values});
    }
    emit(t);
    write_svg(svg::lines(series, {"diameter of depth level sets", "lambda", "diameter"}));
}

void Runner::treedist() {
    const auto records = tree::read_newick_file(o_.in);
    if (records.empty()) throw Error(o_.in + ": no trees");
    std::vector<Point> pts;
    for (const auto& r : records) pts.push_back(make_tree_point(r.tree));
    const DistanceMatrix dm = pairwise_matrix(pts, MetricSpace::bhv(records.front().tree.leaf_count()));
    Table t{{"line"}, {}};
    for (const auto& r : records) t.columns.push_back(std::to_string(r.line));
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::vector<Cell> row{static_cast<std::int64_t>(records[i].line)};
        for (std::size_t j = 0; j < records.size(); ++j) row.push_back(dm(i, j));
        t.rows.push_back(std::move(row));
    }
    emit(t);
}

// "a..b" (integers), "lo:hi:step" or a comma list.
std::vector<double> parse_values(const std::string& text, const char* flag) {
    std::vector<double> out;
    auto number = [&](std::string_view s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
            throw UsageError(std::string(flag) + ": malformed number '" + std::string(s) + "'");
        return v;
    };
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const double a = number(std::string_view(text).substr(0, dots));
        const double b = number(std::string_view(text).substr(dots + 2));
        if (a != std::floor(a) || b != std::floor(b) || b < a) throw UsageError(std::string(flag) + ": bad range " + text);
        for (double v = a; v <= b; v += 1.0) out.push_back(v);
        return out;
    }
    if (text.find(':') != std::string::npos) {
        std::vector<Axis> axes;
        try {
            axes = parse_grid_spec(text);
        } catch (const DomainError& e) {
            throw UsageError(std::string(flag) + ": " + e.what());
        }
        if (axes.size() != 1) throw UsageError(std::string(flag) + ": expected one lo:hi:step range");
        for (std::size_t i = 0; i < axes[0].count(); ++i) out.push_back(axes[0].at(i));
        return out;
    }
    std::string_view rest = text;
    for (;;) {
        const auto comma = rest.find(',');
        out.push_back(number(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

void Runner::gamma_tn() {
    const auto vs = parse_values(o_.v, "--v");
    auto sigmas = parse_values(o_.sigma, "--sigma");
    const bool range = o_.sigma.find(':') != std::string::npos;
    if (range) std::erase_if(sigmas, [](double s) { return !(s > 0.0); });
    if (sigmas.empty()) throw UsageError("--sigma: no positive values");
    for (double s : sigmas)
        if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("--sigma values must be positive");
    for (double v : vs)
        if (!(v >= 1.0) || !std::isfinite(v)) throw UsageError("--v values must be >= 1");
    if (o_.method != "quadrature" && o_.method != "bisection") throw UsageError("--method must be quadrature or bisection");
    if (o_.nodes == 0) throw UsageError("--nodes must be positive");
    Table t{{"v", "sigma", "two_gamma"}, {}};
    std::vector<svg::LineSeries> series;
    for (double v : vs) {
        std::vector<GammaValue> values;
        if (o_.method == "quadrature") {
            values = gamma_t_vs_normal_sweep(v, sigmas, o_.nodes);
        } else {
            for (double s : sigmas) values.push_back(gamma_t_vs_normal(v, s, GammaMethod::bisection));
        }
        svg::LineSeries line{"v = " + io::format_number(v), sigmas, {}};
        for (std::size_t i = 0; i < sigmas.size(); ++i) {
            t.rows.push_back({v, sigmas[i], values[i].two_gamma});
            line.y.push_back(values[i].two_gamma);
        }
        series.push_back(std::move(line));
    }
    emit(t);
    write_svg(svg::lines(series, {"2 gamma(t_v, N(0, sigma^2))", "sigma", "2 gamma"}));
}

void Runner::simulate() {
    std::ifstream in(o_.config);
    if (!in) throw Error("cannot open " + o_.config);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(o_.config + ": " + e.what(), e.byte);
    }
    ExperimentConfig cfg = parse_experiment_config(j);
    if (g_.seed_given) cfg.seed = g_.seed;
    prov.seed = cfg.seed;
    const nlohmann::json report = run_experiment(cfg);
    if (g_.format == "json") {
        nlohmann::json doc;
        doc["provenance"] = {{"version", io::kVersion}, {"command", prov.command}, {"seed", prov.seed}};
        {
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(prov.config_hash));
            doc["provenance"]["config_hash"] = buf;
        }
        if (!prov.timestamp.empty()) doc["provenance"]["generated"] = prov.timestamp;
        doc["report"] = report;
        write(g_.out, doc.dump(2) + "\n");
        return;
    }
    Table t;
    if (cfg.experiment == "clt") {
        t.columns = {"n", "i", "j", "empirical", "empirical_se", "target", "target_se", "projection"};
        for (const auto& r : report["results"]) {
            const std::size_t k = r["empirical_covariance"].size();
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t jj = 0; jj < k; ++jj)
                    t.rows.push_back({r["n"].get<std::int64_t>(), static_cast<std::int64_t>(i),
                                      static_cast<std::int64_t>(jj), r["empirical_covariance"][i][jj].get<double>(),
                                      r["empirical_se"][i][jj].get<double>(), r["target_covariance"][i][jj].get<double>(),
                                      r["target_se"][i][jj].get<double>(),
                                      r["projection_covariance"][i][jj].get<double>()});
        }
    } else {
        t.columns = {"series", "n", "replications", "median", "q1", "q3", "mean", "min", "max"};
        auto num = [](const nlohmann::json& v) {
            return v.is_number() ? v.get<double>() : std::numeric_limits<double>::infinity();
        };
        for (const auto& s : report["series"])
            for (const auto& r : s["per_n"])
                t.rows.push_back({s["name"].get<std::string>(), r["n"].get<std::int64_t>(),
                                  r["replications"].get<std::int64_t>(), num(r["median"]), num(r["q1"]),
                                  num(r["q3"]), num(r["mean"]), num(r["min"]), num(r["max"])});
    }
    emit(t);
}

// Canonical text of every explicitly given option that affects results.
std::string config_text(const CLI::App& app, const CLI::App& sub) {
    std::vector<std::string> parts{sub.get_name()};
    auto collect = [&](const CLI::App& a) {
        for (const CLI::Option* opt : a.get_options()) {
            const std::string name = opt->get_name();
            if (opt->count() == 0 || name == "--help" || name == "--threads" || name == "--out" ||
                name == "--no-timestamp" || name == "--svg")
                continue;
            std::string entry = name + "=";
            for (const auto& r : opt->results()) entry += r + ";";
            parts.push_back(entry);
        }
    };
    collect(app);
    collect(sub);
    std::sort(parts.begin() + 1, parts.end());
    std::string text;
    for (const auto& p : parts) text += p + "\n";
    return text;
}

void add_grid_options(CLI::App* sub, GridOptions& g) {
    sub->add_option("--grid", g.grid, "Lattice lo:hi:step[,lo:hi:step...] (Euclidean data only)");
    sub->add_flag("--wrap", g.wrap, "Make the lattice periodic");
    sub->add_option("--knn", g.knn, "Neighbors per point when evaluating on the sample")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Globals g;
    Options o;
    CLI::App app{"Lens depth toolkit for general metric spaces", "lensdepth"};
    app.set_version_flag("--version", std::string(io::kVersion));
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "Random seed (recorded in every output)");
    app.add_option("--threads", g.threads, "Worker threads (0 = all available)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", g.out, "Output path (default: standard output)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--no-timestamp", g.no_timestamp, "Omit the generation time from output headers");
    app.add_option("--metric", g.metric, "Metric space of the input points")
        ->check(CLI::IsMember({"euclidean", "sphere", "stiefel-chordal", "stiefel-procrustes", "bhv"}));
    app.add_option("--shape", g.shape, "Frame shape RxC for Stiefel CSV input");
    app.add_option("--svg", g.svg, "Also write a static SVG figure here");

    auto* depth = app.add_subcommand("depth", "Empirical lens depth of query points");
    depth->add_option("--sample", o.sample, "Sample file")->required();
    depth->add_option("--queries", o.queries, "Query file (default: the sample itself)");
    depth->add_flag("--leave-one-out", o.leave_one_out, "Exclude each sample point's own pairs (queries omitted)");

    auto* levelset = app.add_subcommand("levelset", "Depth level set, its inner boundary and optional psi sweep");
    levelset->add_option("--sample", o.sample, "Sample file")->required();
    levelset->add_option("--lambda", o.lambda, "Depth threshold")->required()->check(CLI::NonNegativeNumber);
    add_grid_options(levelset, o.grid);
    levelset->add_flag("--leave-one-out", o.leave_one_out, "Leave-one-out depth when evaluating on the sample");
    levelset->add_option("--boundary", o.boundary, "Boundary CSV path (default: <out>_boundary)");
    levelset->add_option("--psi", o.psi_sweep, "Also sweep psi over lambda: diam, inradius or volume")
        ->check(CLI::IsMember({"diam", "diameter", "inradius", "volume"}));
    levelset->add_option("--psi-out", o.psi_out, "Psi sweep path (default: <out>_psi)");
    levelset->add_option("--lambdas", o.lambdas, "Lambda grid size")->check(CLI::Range(2, 1000000));

    auto* psi = app.add_subcommand("psi", "Psi functional of depth level sets over a lambda sweep");
    psi->add_option("--sample", o.sample, "Sample file")->required();
    psi->add_option("--psi", o.psi, "diam, inradius or volume")->check(CLI::IsMember({"diam", "diameter", "inradius", "volume"}));
    add_grid_options(psi, o.grid);
    psi->add_flag("--leave-one-out", o.leave_one_out, "Leave-one-out depth when evaluating on the sample");
    psi->add_option("--lambdas", o.lambdas, "Lambda grid size")->check(CLI::Range(2, 1000000));
    psi->add_option("--lambda-max", o.lambda_max, "Upper end of the lambda grid (default: largest depth)")
        ->check(CLI::PositiveNumber);

    auto* gamma = app.add_subcommand("gamma", "Gamma coefficient of X against Y");
    auto* order = app.add_subcommand("order", "Dispersion order verdicts of X against Y");
    for (auto* sub : {gamma, order}) {
        sub->add_option("--x", o.x, "Sample of X")->required();
        sub->add_option("--y", o.y, "Sample of Y")->required();
        sub->add_option("--psi", o.psi, "diam, inradius or volume")->check(CLI::IsMember({"diam", "diameter", "inradius", "volume"}));
        add_grid_options(sub, o.grid);
        sub->add_option("--lambdas", o.lambdas, "Lambda grid size")->check(CLI::Range(2, 1000000));
        sub->add_option("--s", o.s, "Upper end of the lambda range (default: largest observed depth)")
            ->check(CLI::PositiveNumber);
    }
    gamma->add_option("--refine", o.refine, "Subdivide lambda intervals around crossings this many times");
    order->add_option("--relation", o.relation, "spread-out, strong, weak, giovagnoli or all");

    auto* ddplot = app.add_subcommand("ddplot", "Depth-depth coordinates for two groups");
    ddplot->add_option("--group0", o.group0, "Sample of group 0")->required();
    ddplot->add_option("--group1", o.group1, "Sample of group 1")->required();
    ddplot->add_option("--queries", o.queries, "Query file (default: both groups, leave-one-out)");

    auto* outl = app.add_subcommand("outliers", "Sample points with leave-one-out depth below lambda");
    outl->add_option("--sample", o.sample, "Sample file")->required();
    o.lambda = 0.10;
    outl->add_option("--lambda", o.lambda, "Depth threshold")->check(CLI::NonNegativeNumber);
    outl->add_flag("--deepest", o.deepest, "Report the deepest pair instead");

    auto* dbg = app.add_subcommand("diam-by-group", "Diameter of level sets per group file");
    dbg->add_option("--groups", o.groups, "Directory with one sample file per group")->required();
    dbg->add_option("--lambdas", o.lambdas, "Lambda grid size")->check(CLI::Range(2, 1000000));
    dbg->add_option("--lambda-max", o.lambda_max, "Upper end of the lambda grid")->check(CLI::PositiveNumber);

    auto* treedist = app.add_subcommand("treedist", "BHV distance matrix of a Newick file");
    treedist->add_option("--in", o.in, "Newick file, one tree per line")->required();

    auto* gtn = app.add_subcommand("gamma-tn", "2 gamma of Student t against N(0, sigma^2)");
    gtn->add_option("--v", o.v, "Degrees of freedom: a..b, list or single value");
    gtn->add_option("--sigma", o.sigma, "Sigma: lo:hi:step (non-positive values dropped), list or single value");
    gtn->add_option("--nodes", o.nodes, "Quadrature nodes");
    gtn->add_option("--method", o.method, "quadrature or bisection");

    auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo convergence experiment");
    sim->add_option("--config", o.config, "Experiment JSON")->required();

    std::vector<std::string> storage{"lensdepth"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << io::kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "lensdepth: " << e.what() << "\n";
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (g.threads > 0) set_thread_count(g.threads);
    g.seed_given = app.get_option("--seed")->count() > 0;
    Runner runner(g, o, out);
    const std::string text = config_text(app, *sub);
    runner.prov = {sub->get_name(), g.seed, io::fnv1a(text), g.no_timestamp ? std::string() : io::utc_timestamp()};
    try {
        const std::string name = sub->get_name();
        if (name == "depth") runner.depth();
        else if (name == "levelset") runner.levelset();
        else if (name == "psi") runner.psi();
        else if (name == "gamma") runner.gamma();
        else if (name == "order") runner.order();
        else if (name == "ddplot") runner.ddplot();
        else if (name == "outliers") runner.outliers();
        else if (name == "diam-by-group") runner.diam_by_group();
        else if (name == "treedist") runner.treedist();
        else if (name == "gamma-tn") runner.gamma_tn();
        else if (name == "simulate") runner.simulate();
    } catch (const UsageError& e) {
        err << "lensdepth: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "lensdepth " << sub->get_name() << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace lensdepth::cli
