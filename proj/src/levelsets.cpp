#include "lensdepth/levelsets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "lensdepth/error.hpp"
#include "lensdepth/parallel.hpp"

namespace lensdepth {

std::vector<bool> LevelSet::membership() const {
    std::vector<bool> in(field ? field->values.size() : 0, false);
    for (std::size_t i : members) in[i] = true;
    return in;
}

std::vector<std::size_t> LevelSet::complement() const {
    const auto in = membership();
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < in.size(); ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

LevelSet level_set(const DepthField& field, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("level_set: lambda must be >= 0");
    LevelSet ls{lambda, {}, &field};
    for (std::size_t i = 0; i < field.values.size(); ++i)
        if (field.values[i] >= lambda) ls.members.push_back(i);
    return ls;
}

// ---------------------------------------------------------------------------
// Grids

std::size_t Axis::count() const {
    return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

std::vector<Axis> parse_grid_spec(std::string_view spec) {
    std::vector<Axis> axes;
    auto number = [&](std::string_view s) {
        double v = 0.0;
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
            throw DomainError("grid spec: malformed number '" + std::string(s) + "'");
        return v;
    };
    while (!spec.empty()) {
        const auto comma = spec.find(',');
        const std::string_view part = spec.substr(0, comma);
        const auto c1 = part.find(':');
        const auto c2 = c1 == std::string_view::npos ? c1 : part.find(':', c1 + 1);
        if (c2 == std::string_view::npos) throw DomainError("grid spec: expected lo:hi:step, got '" + std::string(part) + "'");
        Axis a{number(part.substr(0, c1)), number(part.substr(c1 + 1, c2 - c1 - 1)), number(part.substr(c2 + 1))};
        if (!(a.step > 0.0) || !(a.hi >= a.lo)) throw DomainError("grid spec: need hi >= lo and step > 0");
        axes.push_back(a);
        if (comma == std::string_view::npos) break;
        spec.remove_prefix(comma + 1);
    }
    if (axes.empty()) throw DomainError("grid spec: no axes");
    return axes;
}

EvaluationGrid EvaluationGrid::lattice(std::vector<Axis> axes, bool wrap) {
    if (axes.empty()) throw DomainError("lattice: no axes");
    EvaluationGrid g;
    g.axes_ = std::move(axes);
    g.wrap_ = wrap;
    g.space_ = MetricSpace::euclidean(g.axes_.size());
    const std::size_t d = g.axes_.size();
    std::vector<std::size_t> counts(d), strides(d);
    std::size_t total = 1;
    for (std::size_t k = d; k-- > 0;) {
        counts[k] = g.axes_[k].count();
        strides[k] = total;
        total *= counts[k];
    }
    g.points_.reserve(total);
    g.neighbors_.resize(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        RealVector p;
        p.coords.resize(d);
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t c = idx / strides[k] % counts[k];
            p.coords[k] = g.axes_[k].at(c);
            auto& nb = g.neighbors_[idx];
            if (c > 0)
                nb.push_back(idx - strides[k]);
            else if (wrap && counts[k] > 2)
                nb.push_back(idx + (counts[k] - 1) * strides[k]);
            if (c + 1 < counts[k])
                nb.push_back(idx + strides[k]);
            else if (wrap && counts[k] > 2)
                nb.push_back(idx - (counts[k] - 1) * strides[k]);
        }
        std::sort(g.neighbors_[idx].begin(), g.neighbors_[idx].end());
        g.neighbors_[idx].erase(std::unique(g.neighbors_[idx].begin(), g.neighbors_[idx].end()), g.neighbors_[idx].end());
        g.points_.push_back(std::move(p));
    }
    return g;
}

EvaluationGrid EvaluationGrid::knn(std::vector<Point> points, const MetricSpace& space, std::size_t k) {
    EvaluationGrid g;
    g.space_ = space;
    const std::size_t n = points.size();
    const DistanceMatrix dm = pairwise_matrix(points, space);
    g.points_ = std::move(points);
    g.neighbors_.assign(n, {});
    std::vector<std::vector<std::size_t>> nearest(n);
    parallel_for(n, [&](std::size_t i) {
        std::vector<std::size_t> order;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        const std::size_t take = std::min(k, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              return dm(i, a) < dm(i, b) || (dm(i, a) == dm(i, b) && a < b);
                          });
        order.resize(take);
        nearest[i] = std::move(order);
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : nearest[i]) {
            g.neighbors_[i].push_back(j);
            g.neighbors_[j].push_back(i);
        }
    for (auto& nb : g.neighbors_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return g;
}

EvaluationGrid EvaluationGrid::scattered(std::vector<Point> points, const MetricSpace& space) {
    EvaluationGrid g;
    g.space_ = space;
    g.neighbors_.assign(points.size(), {});
    g.points_ = std::move(points);
    return g;
}

bool EvaluationGrid::on_edge(std::size_t i) const {
    if (!is_lattice() || wrap_) return false;
    return neighbors_[i].size() < 2 * axes_.size();
}

double EvaluationGrid::exterior_distance(std::size_t i) const {
    if (!is_lattice() || wrap_) return std::numeric_limits<double>::infinity();
    const auto& p = std::get<RealVector>(points_[i]).coords;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        const Axis& a = axes_[k];
        const auto c = static_cast<std::size_t>(std::llround((p[k] - a.lo) / a.step));
        const std::size_t steps = std::min(c, a.count() - 1 - c) + 1;
        best = std::min(best, static_cast<double>(steps) * a.step);
    }
    return best;
}

double EvaluationGrid::cell_volume() const {
    if (!is_lattice()) return 0.0;
    double v = 1.0;
    for (const Axis& a : axes_) v *= a.step;
    return v;
}

// ---------------------------------------------------------------------------
// Set distances and functionals

namespace {

double directed(std::span<const Point> from, std::span<const Point> to, const MetricSpace& space) {
    std::vector<double> nearest(from.size());
    parallel_for(from.size(), [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& q : to) best = std::min(best, distance(from[i], q, space));
        nearest[i] = best;
    });
    return *std::max_element(nearest.begin(), nearest.end());
}

std::size_t nearest_index(const Point& p, const std::vector<Point>& candidates, const MetricSpace& space) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double d = distance(p, candidates[i], space);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<bool> reference_membership(const LevelSet& ls, std::span<const Point> reference) {
    if (!ls.field) throw DomainError("level set has no depth field");
    const DepthField& f = *ls.field;
    std::vector<bool> out(reference.size());
    std::vector<char> tmp(reference.size());
    parallel_for(reference.size(), [&](std::size_t r) {
        const std::size_t k = nearest_index(reference[r], f.points, f.space);
        tmp[r] = f.values[k] >= ls.lambda;
    });
    for (std::size_t r = 0; r < reference.size(); ++r) out[r] = tmp[r] != 0;
    return out;
}

}  // namespace

double hausdorff(std::span<const Point> a, std::span<const Point> b, const MetricSpace& space) {
    if (a.empty() || b.empty()) throw DomainError("hausdorff: both sets must be nonempty");
    return std::max(directed(a, b, space), directed(b, a, space));
}

std::vector<Point> gather(const std::vector<Point>& points, std::span<const std::size_t> indices) {
    std::vector<Point> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(points.at(i));
    return out;
}

double measure_distance(const LevelSet& a, const LevelSet& b, std::span<const Point> reference) {
    if (reference.empty()) throw DomainError("measure_distance: empty reference sample");
    const auto in_a = reference_membership(a, reference);
    const auto in_b = reference_membership(b, reference);
    std::size_t differ = 0;
    for (std::size_t r = 0; r < reference.size(); ++r) differ += in_a[r] != in_b[r];
    return static_cast<double>(differ) / static_cast<double>(reference.size());
}

std::vector<std::size_t> boundary_points(const LevelSet& ls, const EvaluationGrid& grid) {
    if (!ls.field || ls.field->values.size() != grid.size())
        throw MismatchError("boundary_points: level set and grid have different evaluation sets");
    const auto in = ls.membership();
    std::vector<std::size_t> out;
    for (std::size_t i : ls.members) {
        bool edge = grid.on_edge(i);
        for (std::size_t j : grid.neighbors(i)) edge = edge || !in[j];
        if (edge) out.push_back(i);
    }
    return out;
}

double psi_diameter(std::span<const Point> set, const MetricSpace& space) {
    if (set.empty()) throw DomainError("psi_diameter: empty set");
    std::vector<double> row_max(set.size(), 0.0);
    parallel_for(set.size(), [&](std::size_t i) {
        double m = 0.0;
        for (std::size_t j = i + 1; j < set.size(); ++j) m = std::max(m, distance(set[i], set[j], space));
        row_max[i] = m;
    });
    return *std::max_element(row_max.begin(), row_max.end());
}

double psi_inradius(std::span<const Point> members, std::span<const Point> complement, const MetricSpace& space) {
    if (members.empty()) return 0.0;
    if (complement.empty()) throw DomainError("psi_inradius: empty complement");
    return directed(members, complement, space);
}

VolumeEstimate psi_volume(const LevelSet& ls, std::span<const Point> reference, double reference_mass) {
    if (reference.empty()) throw DomainError("psi_volume: empty reference sample");
    const auto in = reference_membership(ls, reference);
    const double m = static_cast<double>(reference.size());
    const double frac = static_cast<double>(std::count(in.begin(), in.end(), true)) / m;
    return {reference_mass * frac, reference_mass * std::sqrt(frac * (1.0 - frac) / m)};
}

}  // namespace lensdepth
