#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lensdepth/depth.hpp"
#include "lensdepth/metrics.hpp"

namespace lensdepth {

// Members of {depth >= lambda} on a field's evaluation set. `field` is a
// non-owning back-reference and must outlive the level set.
struct LevelSet {
    double lambda = 0.0;
    std::vector<std::size_t> members;  // increasing
    const DepthField* field = nullptr;

    std::vector<bool> membership() const;
    std::vector<std::size_t> complement() const;
};

LevelSet level_set(const DepthField& field, double lambda);

// One lattice axis: coordinates lo, lo + step, ..., up to hi.
struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::size_t count() const;
    double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

// "lo:hi:step[,lo:hi:step...]" -> axes. Throws DomainError on bad input.
std::vector<Axis> parse_grid_spec(std::string_view spec);

// Finite evaluation set with a symmetric neighbor relation.
class EvaluationGrid {
public:
    // Axis-aligned lattice in R^d, last axis fastest. Neighbors differ by one
    // step along one axis; `wrap` makes every axis periodic.
    static EvaluationGrid lattice(std::vector<Axis> axes, bool wrap = false);
    // Symmetrized k-nearest-neighbor graph over arbitrary points.
    static EvaluationGrid knn(std::vector<Point> points, const MetricSpace& space, std::size_t k = 8);
    // Bare point set without neighbors, for functionals that need none.
    static EvaluationGrid scattered(std::vector<Point> points, const MetricSpace& space);

    const std::vector<Point>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    const MetricSpace& space() const noexcept { return space_; }
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
    bool is_lattice() const noexcept { return !axes_.empty(); }
    const std::vector<Axis>& axes() const noexcept { return axes_; }
    bool wraps() const noexcept { return wrap_; }

    // Point sits on the edge of a bounded lattice (has a missing neighbor).
    bool on_edge(std::size_t i) const;
    // Distance from point i to the nearest lattice site just outside the
    // grid; infinite for wrapped lattices and k-NN graphs.
    double exterior_distance(std::size_t i) const;
    // Lebesgue measure represented by one lattice site (product of steps);
    // 0 for k-NN graphs.
    double cell_volume() const;

private:
    std::vector<Point> points_;
    MetricSpace space_;
    std::vector<std::vector<std::size_t>> neighbors_;
    std::vector<Axis> axes_;
    bool wrap_ = false;
};

// max(max_{x in a} d(x, b), max_{y in b} d(y, a)). Throws DomainError when
// either set is empty.
double hausdorff(std::span<const Point> a, std::span<const Point> b, const MetricSpace& space);

std::vector<Point> gather(const std::vector<Point>& points, std::span<const std::size_t> indices);

// Fraction of reference points in exactly one of the two sets; membership
// of a reference point is read at its nearest evaluation point in each
// set's field.
double measure_distance(const LevelSet& a, const LevelSet& b, std::span<const Point> reference);

// Members with at least one non-member neighbor; on a bounded lattice a
// missing neighbor counts as a non-member.
std::vector<std::size_t> boundary_points(const LevelSet& ls, const EvaluationGrid& grid);

// Largest pairwise distance; 0 for a singleton. Throws on an empty set.
double psi_diameter(std::span<const Point> set, const MetricSpace& space);

// Largest distance from a member to its nearest complement point. 0 for an
// empty member set; throws DomainError when the complement is empty.
double psi_inradius(std::span<const Point> members, std::span<const Point> complement, const MetricSpace& space);

struct VolumeEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// reference_mass times the fraction of reference points inside the set
// (nearest-evaluation-point membership), with its binomial standard error.
VolumeEstimate psi_volume(const LevelSet& ls, std::span<const Point> reference, double reference_mass);

}  // namespace lensdepth
