#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lensdepth/depth.hpp"
#include "lensdepth/dispersion.hpp"

namespace lensdepth {

// Depth of each sample point against the rest of the sample: pairs that
// involve the point itself are excluded, so the denominator is C(n-1, 2).
// Requires n >= 3.
std::vector<double> leave_one_out_depth(const Sample& sample);
// The same values as a field over the sample points, flagged leave-one-out.
DepthField self_depth(const Sample& sample);

struct DepthDepthRecord {
    std::size_t index = 0;
    double depth0 = 0.0;
    double depth1 = 0.0;
    // Group the point was drawn from, or -1 for an external query point.
    int group = -1;
};

// Marks query point `index` as sample point `sample_index` of `group`, so
// its depth in that group is computed leave-one-out.
struct GroupMembership {
    int group = -1;
    std::size_t sample_index = 0;
};

// One record per query point. `memberships` is empty or aligned with
// `points`; both samples need n >= 3 when any point is a member.
std::vector<DepthDepthRecord> depth_depth(const Sample& s0, const Sample& s1, std::span<const Point> points,
                                          std::span<const std::optional<GroupMembership>> memberships = {});

// Both groups stacked as query points: group 0 first, then group 1.
std::vector<DepthDepthRecord> depth_depth_of_groups(const Sample& s0, const Sample& s1);

// Indices with depth < lambda, increasing.
std::vector<std::size_t> outliers(const DepthField& field, double lambda);

// Index of the largest depth; the lowest index wins ties. Throws on an
// empty field.
std::size_t deepest_point(const DepthField& field);
// The two deepest indices in decreasing depth order (lowest index first
// among ties). Needs at least two values.
std::pair<std::size_t, std::size_t> deepest_pair(const DepthField& field);

// Diameter-vs-lambda curve per group, with level sets taken over the
// group's own sample points under leave-one-out depth.
std::map<std::string, PsiCurve> diameter_curve_by_group(const std::map<std::string, Sample>& groups,
                                                        std::span<const double> lambdas);

}  // namespace lensdepth
