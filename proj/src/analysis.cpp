#include "lensdepth/analysis.hpp"

#include <algorithm>
#include <numeric>

#include "lensdepth/error.hpp"
#include "lensdepth/levelsets.hpp"
#include "lensdepth/parallel.hpp"

namespace lensdepth {

namespace {

std::uint64_t choose2(std::uint64_t k) { return k < 2 ? 0 : k * (k - 1) / 2; }

// Lens count for x over the sample pairs that avoid index `skip`.
double depth_skipping(const Point& x, const Sample& sample, std::size_t skip) {
    const std::size_t n = sample.size();
    std::vector<double> to_x(n);
    for (std::size_t i = 0; i < n; ++i)
        if (i != skip) to_x[i] = distance(x, sample[i], sample.space());
    std::uint64_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == skip) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == skip) continue;
            const double span = sample.pair_distance(i, j);
            hits += static_cast<std::uint64_t>(to_x[i] <= span && to_x[j] <= span);
        }
    }
    return static_cast<double>(hits) / pair_count(n - 1);
}

bool on_line(const MetricSpace& space) { return space.kind == MetricKind::euclidean && space.dim == 1; }

void require_loo(const Sample& s, const char* what) {
    if (s.size() < 3) throw DomainError(std::string(what) + ": leave-one-out depth needs a sample of at least 3 points");
}

}  // namespace

std::vector<double> leave_one_out_depth(const Sample& sample) {
    require_loo(sample, "leave_one_out_depth");
    const std::size_t n = sample.size();
    std::vector<double> out(n);
    if (on_line(sample.space())) {
        std::vector<double> sorted;
        for (const Point& p : sample.points()) sorted.push_back(std::get<RealVector>(p).coords[0]);
        std::sort(sorted.begin(), sorted.end());
        const std::uint64_t m = n - 1;
        for (std::size_t k = 0; k < n; ++k) {
            const double x = std::get<RealVector>(sample[k]).coords[0];
            // x itself is neither strictly below nor strictly above x.
            const auto below = static_cast<std::uint64_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
            const auto above = static_cast<std::uint64_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x));
            out[k] = static_cast<double>(choose2(m) - choose2(below) - choose2(above)) / pair_count(m);
        }
        return out;
    }
    Sample cached = sample;
    cached.build_cache();
    const DistanceMatrix& dm = *cached.cache();
    parallel_for(n, [&](std::size_t k) {
        const std::span<const double> to_x = dm.row(k);
        std::uint64_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const std::span<const double> row = dm.row(i);
            for (std::size_t j = i + 1; j < n; ++j) {
                if (j == k) continue;
                const double span = row[j];
                hits += static_cast<std::uint64_t>(to_x[i] <= span && to_x[j] <= span);
            }
        }
        out[k] = static_cast<double>(hits) / pair_count(n - 1);
    });
    return out;
}

DepthField self_depth(const Sample& sample) {
    DepthField f;
    f.values = leave_one_out_depth(sample);
    f.points = sample.points();
    f.sample_size = sample.size();
    f.space = sample.space();
    f.leave_one_out = true;
    return f;
}

std::vector<DepthDepthRecord> depth_depth(const Sample& s0, const Sample& s1, std::span<const Point> points,
                                          std::span<const std::optional<GroupMembership>> memberships) {
    if (s0.size() < 2 || s1.size() < 2) throw DomainError("depth_depth: each group needs at least 2 points");
    if (!(s0.space() == s1.space())) throw MismatchError("depth_depth: groups live in different spaces");
    if (!memberships.empty() && memberships.size() != points.size())
        throw MismatchError("depth_depth: memberships not aligned with points");
    const Sample* groups[2] = {&s0, &s1};
    bool any_member = false;
    for (const auto& m : memberships) {
        if (!m) continue;
        if (m->group != 0 && m->group != 1) throw DomainError("depth_depth: group must be 0 or 1");
        if (m->sample_index >= groups[m->group]->size()) throw DomainError("depth_depth: member index out of range");
        require_loo(*groups[m->group], "depth_depth");
        any_member = true;
    }
    if (points.empty()) return {};

    std::vector<double> plain[2];
    for (int g = 0; g < 2; ++g) plain[g] = batch_depth_values(points, *groups[g]);
    std::vector<DepthDepthRecord> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = {i, plain[0][i], plain[1][i], -1};
    if (!any_member) return out;

    Sample cached[2] = {s0, s1};
    for (auto& c : cached) c.build_cache();
    parallel_for(points.size(), [&](std::size_t i) {
        const auto& m = memberships[i];
        if (!m) return;
        out[i].group = m->group;
        const double d = depth_skipping(points[i], cached[m->group], m->sample_index);
        (m->group == 0 ? out[i].depth0 : out[i].depth1) = d;
    });
    return out;
}

std::vector<DepthDepthRecord> depth_depth_of_groups(const Sample& s0, const Sample& s1) {
    std::vector<Point> points = s0.points();
    points.insert(points.end(), s1.points().begin(), s1.points().end());
    std::vector<std::optional<GroupMembership>> members;
    for (std::size_t i = 0; i < s0.size(); ++i) members.push_back(GroupMembership{0, i});
    for (std::size_t i = 0; i < s1.size(); ++i) members.push_back(GroupMembership{1, i});
    return depth_depth(s0, s1, points, members);
}

std::vector<std::size_t> outliers(const DepthField& field, double lambda) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < field.values.size(); ++i)
        if (field.values[i] < lambda) out.push_back(i);
    return out;
}

std::size_t deepest_point(const DepthField& field) {
    if (field.values.empty()) throw DomainError("deepest_point: empty field");
    std::size_t best = 0;
    for (std::size_t i = 1; i < field.values.size(); ++i)
        if (field.values[i] > field.values[best]) best = i;
    return best;
}

std::pair<std::size_t, std::size_t> deepest_pair(const DepthField& field) {
    if (field.values.size() < 2) throw DomainError("deepest_pair: need at least two values");
    std::vector<std::size_t> order(field.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + 2, order.end(), [&](std::size_t a, std::size_t b) {
        return field.values[a] > field.values[b] || (field.values[a] == field.values[b] && a < b);
    });
    return {order[0], order[1]};
}

std::map<std::string, PsiCurve> diameter_curve_by_group(const std::map<std::string, Sample>& groups,
                                                        std::span<const double> lambdas) {
    std::map<std::string, PsiCurve> out;
    for (const auto& [label, sample] : groups) {
        if (sample.size() < 3) throw DomainError("group '" + label + "': leave-one-out depth needs at least 3 points");
        const DepthField field = self_depth(sample);
        const EvaluationGrid grid = EvaluationGrid::scattered(sample.points(), sample.space());
        PsiCurve c = psi_curve(field, grid, PsiKind::diameter, lambdas);
        c.region = "sample of group '" + label + "'";
        out.emplace(label, std::move(c));
    }
    return out;
}

}  // namespace lensdepth
